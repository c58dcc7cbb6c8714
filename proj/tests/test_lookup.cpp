#include <cmath>
#include <numeric>

#include "doctest.h"
#include "repc/lookup.hpp"
#include "repc/metrics.hpp"

using namespace repc;
using namespace repc::lookup;

namespace {

LookupParams defaults() {
    return LookupParams{};  // N=1000 M=16 K=10 D=64 q=1 lambda=0.01 r=0.01
}

}  // namespace

TEST_CASE("parameter validation rejects bad shapes") {
    auto p = defaults();
    p.q = 3;  // does not divide m=16
    CHECK_THROWS_AS(p.validate(), contract_error);
    p = defaults();
    p.d = 30;  // m/q = 16 does not divide 30
    CHECK_THROWS_AS(p.validate(), contract_error);
    p = defaults();
    p.r = -0.1;
    CHECK_THROWS_AS(p.validate(), contract_error);
    p = defaults();
    p.k = 100;
    p.q = 16;  // 100^16 overflows
    CHECK_THROWS_AS(p.validate(), contract_error);
}

TEST_CASE("defaults produce the documented shapes") {
    const auto g = generate(defaults());
    CHECK(g.w.rows == 1000);
    CHECK(g.w.cols == 16);
    CHECK(g.z.rows == 1000);
    CHECK(g.z.cols == 64);
    CHECK(g.noise.rows == 1000);
    CHECK(g.noise.cols == 64);
}

TEST_CASE("k = 1 with r = 0 collapses everything") {
    LookupParams p;
    p.n = 20;
    p.m = 4;
    p.k = 1;
    p.d = 8;
    p.r = 0.0;
    const auto g = generate(p);
    for (const int32_t t : g.w.tok) CHECK(t == 0);
    for (int64_t i = 1; i < g.z.rows; ++i) {
        for (int64_t c = 0; c < g.z.cols; ++c) CHECK(g.z.at(i, c) == g.z.at(0, c));
    }
    const auto b = complexity(g.program, g.w, g.noise);
    CHECK(b.k_w_given_pw == 0.0);   // log2(1) = 0
    CHECK(b.k_z_given_wf == 0.0);   // noiseless
}

TEST_CASE("q = 1 decoding is plain concatenation of token rows") {
    LookupParams p;
    p.n = 4;
    p.m = 2;
    p.k = 2;
    p.d = 4;
    p.r = 0.0;
    const auto g = generate(p);
    TokenMatrix w(1, 2);
    w.at(0, 0) = 0;
    w.at(0, 1) = 1;
    const auto z = decode(g.program, w);
    const auto& row0 = g.program.table.row(0);
    const auto& row1 = g.program.table.row(1);
    CHECK(z.at(0, 0) == row0[0]);
    CHECK(z.at(0, 1) == row0[1]);
    CHECK(z.at(0, 2) == row1[0]);
    CHECK(z.at(0, 3) == row1[1]);
}

TEST_CASE("generate with r = 0 round-trips through decode") {
    LookupParams p;
    p.n = 50;
    p.m = 8;
    p.k = 5;
    p.d = 16;
    p.q = 2;
    p.r = 0.0;
    p.seed = 3;
    const auto g = generate(p);
    const auto z2 = decode(g.program, g.w);
    CHECK(g.z.idx == z2.idx);
}

TEST_CASE("generated noise is exactly Z minus decode") {
    const auto g = generate(defaults());
    const auto clean = decode(g.program, g.w);
    for (size_t i = 0; i < g.z.idx.size(); ++i) {
        CHECK(g.z.idx[i] - clean.idx[i] == g.noise.idx[i]);
    }
}

TEST_CASE("row permutation permutes decoded rows identically") {
    LookupParams p;
    p.n = 10;
    p.m = 4;
    p.k = 3;
    p.d = 8;
    p.r = 0.0;
    const auto g = generate(p);
    TokenMatrix rev(p.n, p.m);
    for (int64_t i = 0; i < p.n; ++i) {
        for (int64_t j = 0; j < p.m; ++j) rev.at(i, j) = g.w.at(p.n - 1 - i, j);
    }
    const auto z = decode(g.program, rev);
    for (int64_t i = 0; i < p.n; ++i) {
        for (int64_t c = 0; c < p.d; ++c) CHECK(z.at(i, c) == g.z.at(p.n - 1 - i, c));
    }
}

TEST_CASE("q = m uses a single table row per sentence") {
    LookupParams p;
    p.n = 6;
    p.m = 2;
    p.k = 3;
    p.q = 2;
    p.d = 5;
    p.r = 0.0;
    const auto g = generate(p);
    CHECK(g.program.table.rows() == 9);
    CHECK(g.program.table.cols() == 5);
    TokenMatrix w(1, 2);
    w.at(0, 0) = 2;
    w.at(0, 1) = 1;
    const auto z = decode(g.program, w);
    const auto& row = g.program.table.row(2 * 3 + 1);  // mixed radix, first token high
    for (int64_t c = 0; c < 5; ++c) CHECK(z.at(0, c) == row[c]);
}

TEST_CASE("closed-form sentence terms") {
    const auto g = generate(defaults());
    const auto b = complexity(g.program, g.w, g.noise);
    CHECK(b.k_w_given_pw == doctest::Approx(1000 * 16 * std::log2(10.0)).epsilon(1e-12));
    CHECK(b.k_pw == doctest::Approx(std::log2(10.0) + 4.0).epsilon(1e-12));
    CHECK(b.k_f > 0.0);
    CHECK(b.k_z_given_wf > 0.0);
}

TEST_CASE("K(f) equals the table code length and grows with d") {
    LookupParams p;
    p.n = 10;
    p.m = 4;
    p.k = 4;
    p.d = 16;
    p.seed = 11;
    const auto g = generate(p);
    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = {p.lambda};
    const auto b = complexity(g.program, g.w, g.noise);
    CHECK(b.k_f == codelen::total_code_length(g.program.table.dense(), sp));

    auto p2 = p;
    p2.d = 32;
    const auto g2 = generate(p2);
    const auto b2 = complexity(g2.program, g2.w, g2.noise);
    CHECK(b2.k_f > b.k_f);
}

TEST_CASE("same seed reproduces bit-identical output") {
    auto p = defaults();
    p.n = 64;
    const auto a = generate(p);
    const auto b = generate(p);
    CHECK(a.w.tok == b.w.tok);
    CHECK(a.z.idx == b.z.idx);
    CHECK(a.noise.idx == b.noise.idx);
}

TEST_CASE("lazy table mode matches the materialized values and expectation K(f)") {
    LookupParams p;
    p.n = 8;
    p.m = 4;
    p.k = 5;
    p.q = 2;
    p.d = 8;
    p.seed = 21;
    const auto dense = generate(p, kDefaultMaterializeCap);
    const auto lazy = generate(p, /*materialize_cap_entries=*/1);
    CHECK_FALSE(lazy.program.table.materialized());
    CHECK(dense.program.table.materialized());
    CHECK(dense.z.idx == lazy.z.idx);

    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = {p.lambda};
    const auto bl = complexity(lazy.program, lazy.w, lazy.noise);
    const double expected = static_cast<double>(p.table_entries()) *
                            codelen::skellam_entropy_bits(sp);
    CHECK(bl.k_f == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mean compositionality rises with sentence length (coarse trend)") {
    // The full 10-seed sweep lives in the acceptance suite; keep a small
    // smoke version here.
    double last = 0.0;
    for (int64_t m : {1, 4, 16}) {
        double acc = 0.0;
        for (uint64_t seed = 0; seed < 3; ++seed) {
            auto p = defaults();
            p.m = m;
            p.seed = seed;
            const auto g = generate(p);
            acc += metrics::compositionality(complexity(g.program, g.w, g.noise));
        }
        const double mean = acc / 3.0;
        CHECK(mean > last);
        last = mean;
    }
}
