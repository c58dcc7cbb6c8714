#include "repc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace repc::metrics {

double compositionality(const ComplexityBreakdown& b) {
    b.validate();
    const double den = b.denominator();
    if (!(den > 0.0)) {
        throw contract_error(
            "compositionality: degenerate representation, K(f) + K(Z|W,f) = 0");
    }
    return b.numerator() / den;
}

double language_compositionality(double k_z_bits, double k_z_given_w_bits) {
    if (k_z_bits < 0.0) throw contract_error("language_compositionality: K(Z) must be >= 0");
    if (!(k_z_given_w_bits > 0.0)) {
        throw contract_error("language_compositionality: K(Z|W) must be > 0");
    }
    return k_z_bits / k_z_given_w_bits;
}

double sentence_distance(const int32_t* a, const int32_t* b, int64_t len, SentenceMetric metric) {
    switch (metric) {
        case SentenceMetric::hamming: {
            int64_t h = 0;
            for (int64_t i = 0; i < len; ++i) h += (a[i] != b[i]);
            return static_cast<double>(h);
        }
        case SentenceMetric::normalized_edit: {
            // Levenshtein over two equal-length rows, normalized by length.
            std::vector<int64_t> prev(static_cast<size_t>(len) + 1);
            std::vector<int64_t> cur(static_cast<size_t>(len) + 1);
            for (int64_t j = 0; j <= len; ++j) prev[static_cast<size_t>(j)] = j;
            for (int64_t i = 1; i <= len; ++i) {
                cur[0] = i;
                for (int64_t j = 1; j <= len; ++j) {
                    const int64_t sub = prev[static_cast<size_t>(j - 1)] + (a[i - 1] != b[j - 1]);
                    cur[static_cast<size_t>(j)] =
                        std::min({sub, prev[static_cast<size_t>(j)] + 1,
                                  cur[static_cast<size_t>(j - 1)] + 1});
                }
                std::swap(prev, cur);
            }
            return static_cast<double>(prev[static_cast<size_t>(len)]) /
                   static_cast<double>(std::max<int64_t>(len, 1));
        }
    }
    throw contract_error("sentence_distance: unknown metric");
}

double repr_distance(const double* a, const double* b, int64_t len, ReprMetric metric) {
    switch (metric) {
        case ReprMetric::euclidean:
        case ReprMetric::squared_euclidean: {
            double s = 0.0;
            for (int64_t i = 0; i < len; ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return metric == ReprMetric::euclidean ? std::sqrt(s) : s;
        }
        case ReprMetric::cosine: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (int64_t i = 0; i < len; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (!(na > 0.0) || !(nb > 0.0)) {
                throw contract_error("repr_distance: cosine undefined for zero-norm row");
            }
            return 1.0 - dot / std::sqrt(na * nb);
        }
    }
    throw contract_error("repr_distance: unknown metric");
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw contract_error("pearson: need two same-length lists with >= 2 entries");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw numerical_error("pearson: a distance list has zero variance");
    }
    return sxy / std::sqrt(sxx * syy);
}

double topological_similarity(const TokenMatrix& w, std::span<const double> z, int64_t z_cols,
                              const DistanceConfig& cfg, int64_t max_pairs, uint64_t seed) {
    const int64_t n = w.rows;
    if (n < 2) throw contract_error("topological_similarity: need at least 2 rows");
    if (z_cols < 1 || static_cast<int64_t>(z.size()) != n * z_cols) {
        throw contract_error("topological_similarity: Z shape mismatch");
    }

    std::vector<double> dw;
    std::vector<double> dz;
    const int64_t total_pairs = n * (n - 1) / 2;
    const auto push_pair = [&](int64_t i, int64_t j) {
        dw.push_back(sentence_distance(w.row(i), w.row(j), w.cols, cfg.sentence));
        dz.push_back(repr_distance(z.data() + i * z_cols, z.data() + j * z_cols, z_cols, cfg.repr));
    };
    if (total_pairs <= max_pairs) {
        dw.reserve(static_cast<size_t>(total_pairs));
        dz.reserve(static_cast<size_t>(total_pairs));
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t j = i + 1; j < n; ++j) push_pair(i, j);
        }
    } else {
        Philox rng(seed, make_stream(StreamTag::metrics_pairs));
        dw.reserve(static_cast<size_t>(max_pairs));
        dz.reserve(static_cast<size_t>(max_pairs));
        for (int64_t p = 0; p < max_pairs; ++p) {
            const int64_t i = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n)));
            int64_t j = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n - 1)));
            if (j >= i) ++j;
            push_pair(std::min(i, j), std::max(i, j));
        }
    }
    return pearson(dw, dz);
}

}  // namespace repc::metrics
