#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "repc/matrix.hpp"
#include "repc/metrics_types.hpp"
#include "repc/rng.hpp"

namespace repc::metrics {

enum class SentenceMetric { hamming, normalized_edit };
enum class ReprMetric { euclidean, squared_euclidean, cosine };

struct DistanceConfig {
    SentenceMetric sentence = SentenceMetric::hamming;
    ReprMetric repr = ReprMetric::euclidean;
};

// C(Z) = (K(p_w) + K(W|p_w) + K(f) + K(Z|W,f)) / (K(f) + K(Z|W,f)); >= 1 for
// every valid breakdown, with equality iff the sentence terms vanish.
double compositionality(const ComplexityBreakdown& b);

// C^L(Z) = K(Z) / K(Z|W^L).
double language_compositionality(double k_z_bits, double k_z_given_w_bits);

// Pearson correlation between pairwise sentence distances and pairwise
// representation distances. Z is row-major, one row per sentence. When the
// pair count exceeds max_pairs, pairs are subsampled uniformly (with
// replacement) from the seeded stream.
double topological_similarity(const TokenMatrix& w, std::span<const double> z, int64_t z_cols,
                              const DistanceConfig& cfg = {}, int64_t max_pairs = 2'000'000,
                              uint64_t seed = 0);

double sentence_distance(const int32_t* a, const int32_t* b, int64_t len, SentenceMetric metric);
double repr_distance(const double* a, const double* b, int64_t len, ReprMetric metric);
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace repc::metrics
