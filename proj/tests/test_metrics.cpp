#include <cmath>
#include <vector>

#include "doctest.h"
#include "repc/metrics.hpp"
#include "repc/rng.hpp"

using namespace repc;
using namespace repc::metrics;

TEST_CASE("compositionality ratio arithmetic") {
    CHECK(compositionality({0, 0, 10, 5}) == doctest::Approx(1.0));
    CHECK(compositionality({1, 99, 10, 90}) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)compositionality({1, 1, 0, 0}), contract_error);
    CHECK_THROWS_AS((void)compositionality({-1, 0, 1, 1}), contract_error);
}

TEST_CASE("compositionality is >= 1, equal iff sentence terms vanish") {
    Philox g(3);
    for (int i = 0; i < 200; ++i) {
        ComplexityBreakdown b{g.next_double() * 100, g.next_double() * 100,
                              g.next_double() * 100 + 1e-6, g.next_double() * 100};
        CHECK(compositionality(b) >= 1.0);
    }
    CHECK(compositionality({0, 0, 3, 7}) == 1.0);
}

TEST_CASE("language compositionality") {
    CHECK(language_compositionality(384.0, 384.0) == doctest::Approx(1.0));
    CHECK(language_compositionality(64 * std::log2(64.0), 192.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)language_compositionality(10.0, 0.0), contract_error);
}

TEST_CASE("hamming and edit distances") {
    const int32_t a[4] = {1, 2, 3, 4};
    const int32_t b[4] = {1, 0, 3, 0};
    CHECK(sentence_distance(a, b, 4, SentenceMetric::hamming) == 2.0);
    CHECK(sentence_distance(a, a, 4, SentenceMetric::hamming) == 0.0);
    const int32_t c[4] = {2, 3, 4, 0};  // shift of a
    CHECK(sentence_distance(a, c, 4, SentenceMetric::normalized_edit) ==
          doctest::Approx(2.0 / 4.0));
    CHECK(sentence_distance(a, c, 4, SentenceMetric::hamming) == 4.0);
}

TEST_CASE("representation distances") {
    const double a[3] = {1, 0, 0};
    const double b[3] = {0, 1, 0};
    CHECK(repr_distance(a, b, 3, ReprMetric::euclidean) == doctest::Approx(std::sqrt(2.0)));
    CHECK(repr_distance(a, b, 3, ReprMetric::squared_euclidean) == doctest::Approx(2.0));
    CHECK(repr_distance(a, b, 3, ReprMetric::cosine) == doctest::Approx(1.0));
    CHECK(repr_distance(a, a, 3, ReprMetric::cosine) == doctest::Approx(0.0));
    const double zero[3] = {0, 0, 0};
    CHECK_THROWS_AS((void)repr_distance(a, zero, 3, ReprMetric::cosine), contract_error);
}

namespace {

// Orthogonal unit codes: token t of sentence position j sets a distinct
// one-hot block, so squared euclidean distance is exactly 2x hamming.
void one_hot_embedding(const TokenMatrix& w, int32_t vocab, std::vector<double>& z,
                       int64_t& z_cols) {
    z_cols = w.cols * vocab;
    z.assign(static_cast<size_t>(w.rows * z_cols), 0.0);
    for (int64_t i = 0; i < w.rows; ++i) {
        for (int64_t j = 0; j < w.cols; ++j) {
            z[static_cast<size_t>(i * z_cols + j * vocab + w.at(i, j))] = 1.0;
        }
    }
}

}  // namespace

TEST_CASE("one-hot concatenation: hamming vs squared euclidean correlates perfectly") {
    Philox g(17);
    TokenMatrix w(40, 5);
    for (auto& t : w.tok) t = static_cast<int32_t>(g.next_below(4));
    std::vector<double> z;
    int64_t z_cols = 0;
    one_hot_embedding(w, 4, z, z_cols);
    DistanceConfig cfg;
    cfg.repr = ReprMetric::squared_euclidean;
    CHECK(topological_similarity(w, z, z_cols, cfg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("independent noise gives near-zero correlation") {
    Philox g(29);
    TokenMatrix w(1000, 6);
    for (auto& t : w.tok) t = static_cast<int32_t>(g.next_below(5));
    std::vector<double> z(1000 * 8);
    for (auto& v : z) v = g.next_double() - 0.5;
    const double rho = topological_similarity(w, z, 8);
    CHECK(std::fabs(rho) < 0.1);
}

TEST_CASE("row permutation leaves full-pair topsim unchanged") {
    Philox g(31);
    const int64_t n = 60;
    TokenMatrix w(n, 4);
    for (auto& t : w.tok) t = static_cast<int32_t>(g.next_below(3));
    std::vector<double> z(static_cast<size_t>(n) * 4);
    for (auto& v : z) v = g.next_double();
    // make z depend on w a little so the correlation is nontrivial
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t c = 0; c < 4; ++c) z[static_cast<size_t>(i * 4 + c)] += w.at(i, c);
    }
    const double before = topological_similarity(w, z, 4);

    std::vector<int64_t> perm(n);
    for (int64_t i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = n - 1 - i;
    TokenMatrix wp(n, 4);
    std::vector<double> zp(z.size());
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t c = 0; c < 4; ++c) {
            wp.at(i, c) = w.at(perm[static_cast<size_t>(i)], c);
            zp[static_cast<size_t>(i * 4 + c)] = z[static_cast<size_t>(perm[static_cast<size_t>(i)] * 4 + c)];
        }
    }
    CHECK(topological_similarity(wp, zp, 4) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("subsampled mode is deterministic and inside [-1, 1]") {
    Philox g(37);
    TokenMatrix w(300, 4);
    for (auto& t : w.tok) t = static_cast<int32_t>(g.next_below(7));
    std::vector<double> z(300 * 3);
    for (auto& v : z) v = g.next_double();
    for (int64_t i = 0; i < 300; ++i) z[static_cast<size_t>(i * 3)] += 0.2 * w.at(i, 0);
    const double a = topological_similarity(w, z, 3, {}, /*max_pairs=*/500, /*seed=*/5);
    const double b = topological_similarity(w, z, 3, {}, 500, 5);
    CHECK(a == b);
    CHECK(a >= -1.0 - 1e-12);
    CHECK(a <= 1.0 + 1e-12);
    const double c = topological_similarity(w, z, 3, {}, 500, 6);
    CHECK(a != c);  // different pair subsample
}

TEST_CASE("degenerate inputs raise") {
    TokenMatrix w(3, 3);
    w.at(0, 0) = 1;
    w.at(1, 0) = 2;  // sentence distances vary
    std::vector<double> z{0.0, 0.0, 0.0};  // identical rows -> zero variance
    CHECK_THROWS_AS((void)topological_similarity(w, z, 1), numerical_error);
    TokenMatrix one(1, 3);
    std::vector<double> z1{0.0};
    CHECK_THROWS_AS((void)topological_similarity(one, z1, 1), contract_error);
}
