#pragma once

#include <cstdint>
#include <span>

#include "repc/matrix.hpp"
#include "repc/rng.hpp"

namespace repc::codelen {

// Skellam(mu1 = mu2 = sigma^2 / (2 lambda^2)) on the lattice: the difference
// of two equal-rate Poissons, scaled by the spacing, has mean 0 and variance
// sigma^2 in value units. A nonzero mean is supported only as a whole-lattice
// shift.
struct SkellamParams {
    double mean = 0.0;
    double sigma = 1.0;
    Lattice lattice;

    double rate() const { return sigma * sigma / (2.0 * lattice.spacing * lattice.spacing); }
    int64_t mean_index() const;
    void validate() const;
};

// -log2 P(value = k * spacing). Finite for every k; exactly symmetric about
// the mean index.
double skellam_log_pmf(int64_t k, const SkellamParams& params);

// i.i.d. Skellam draws as lattice indices.
QuantizedMatrix skellam_sample(const SkellamParams& params, int64_t rows, int64_t cols, Philox& rng);

// Sum of skellam_log_pmf over all entries. Caches per distinct index, so
// large matrices with a bounded index range cost one PMF evaluation per
// distinct value.
double total_code_length(const QuantizedMatrix& data, const SkellamParams& params);

// E[-log2 P] under the same distribution; the exact per-entry expectation of
// total_code_length.
double skellam_entropy_bits(const SkellamParams& params);

// Correction-bit cost sum_d -log2( N(z_d * spacing; mean_d, std_d) * spacing ),
// the density-times-bin-width approximation of the discretized Gaussian.
double discretized_gaussian_nll_bits(std::span<const int64_t> z, std::span<const double> mean,
                                     std::span<const double> stddev, Lattice lattice);

// Same cost for a single scalar, taking the value directly.
double discretized_gaussian_nll_bits_value(double z_value, double mean, double stddev,
                                           double spacing);

namespace detail {

// Direct double-Poisson convolution, summed in log space around the peak of
// the summand; tails truncated far below 1e-12 of the mass. Usable well past
// the production cutoff so the two branches can be compared on an overlap
// region.
double skellam_nll_bits_convolution(int64_t k, double rate);

// e^{-2 mu} I_|k|(2 mu) evaluated through log-space modified-Bessel
// asymptotics; requires a reasonably large argument (rate >= ~10).
double skellam_nll_bits_bessel(int64_t k, double rate);

// log I_n(x), natural log, n >= 0, x > 0. Large-argument series for small
// orders, Olver's uniform asymptotic expansion for large orders, stable
// downward recurrence between.
double log_bessel_i(int64_t n, double x);

// Production dispatch boundary between the two PMF branches.
inline constexpr double kConvolutionMaxRate = 50.0;

}  // namespace detail

}  // namespace repc::codelen
