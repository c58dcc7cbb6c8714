#include "repc/codelen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <vector>

namespace repc::codelen {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLn2Pi = 1.83787706640934548356;

}  // namespace

int64_t SkellamParams::mean_index() const {
    const double q = mean / lattice.spacing;
    const double k = std::nearbyint(q);
    if (std::fabs(q - k) > 1e-9) {
        throw contract_error("SkellamParams: mean must be a lattice multiple");
    }
    return static_cast<int64_t>(k);
}

void SkellamParams::validate() const {
    lattice.validate();
    if (!std::isfinite(mean)) throw contract_error("SkellamParams: mean must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw contract_error("SkellamParams: sigma must be > 0 and finite");
    }
    mean_index();
    const double mu = rate();
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw numerical_error("SkellamParams: Poisson rate sigma^2/(2 lambda^2) out of range");
    }
}

namespace detail {

double skellam_nll_bits_convolution(int64_t k, double mu) {
    // P(k) = sum_j Pois(j + |k|; mu) Pois(j; mu), log-sum-exp around the peak.
    const double a = std::fabs(static_cast<double>(k));
    const double jstar = 0.5 * (-a + std::sqrt(a * a + 4.0 * mu * mu));
    const double width = 12.0 * std::sqrt(std::max(jstar, 1.0)) + 40.0;
    const int64_t j_lo = std::max<int64_t>(0, static_cast<int64_t>(std::floor(jstar - width)));
    const int64_t j_hi = static_cast<int64_t>(std::ceil(jstar + width));
    const double log_mu = std::log(mu);

    std::vector<double> logs;
    logs.reserve(static_cast<size_t>(j_hi - j_lo + 1));
    double max_log = -std::numeric_limits<double>::infinity();
    for (int64_t j = j_lo; j <= j_hi; ++j) {
        const double jd = static_cast<double>(j);
        const double l = -2.0 * mu + (2.0 * jd + a) * log_mu - std::lgamma(jd + a + 1.0) -
                         std::lgamma(jd + 1.0);
        logs.push_back(l);
        max_log = std::max(max_log, l);
    }
    double s = 0.0;
    for (const double l : logs) s += std::exp(l - max_log);
    const double log_p = max_log + std::log(s);
    if (!std::isfinite(log_p)) {
        throw numerical_error("skellam convolution: non-finite log probability");
    }
    return -log_p / kLn2;
}

namespace {

// I_n(x) = e^x / sqrt(2 pi x) * sum_j (-1)^j a_j(n) / x^j, for n^2 <= x/8.
double log_bessel_i_large_arg(int64_t n, double x) {
    const double n2_4 = 4.0 * static_cast<double>(n) * static_cast<double>(n);
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j <= 60; ++j) {
        const double odd = static_cast<double>(2 * j - 1);
        term *= -(n2_4 - odd * odd) / (8.0 * x * static_cast<double>(j));
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw numerical_error("bessel: large-argument series out of range");
    }
    return x - 0.5 * (kLn2Pi + std::log(x)) + std::log(sum);
}

// Olver's uniform asymptotic expansion of I_nu(nu z), DLMF 10.41.3, with
// coefficients u_1..u_6.
double log_bessel_i_uniform(double nu, double x) {
    const double z = x / nu;
    const double w = std::sqrt(1.0 + z * z);
    const double t = 1.0 / w;
    const double t2 = t * t;
    const double eta = w + std::log(z / (1.0 + w));

    const double u1 = t * (3.0 - 5.0 * t2) / 24.0;
    const double u2 = t2 * (81.0 + t2 * (-462.0 + t2 * 385.0)) / 1152.0;
    const double u3 =
        t * t2 * (30375.0 + t2 * (-369603.0 + t2 * (765765.0 - t2 * 425425.0))) / 414720.0;
    const double u4 = t2 * t2 *
                      (4465125.0 +
                       t2 * (-94121676.0 +
                             t2 * (349922430.0 + t2 * (-446185740.0 + t2 * 185910725.0)))) /
                      39813120.0;
    const double u5 =
        t * t2 * t2 *
        (1519035525.0 +
         t2 * (-49286948607.0 +
               t2 * (284499769554.0 +
                     t2 * (-614135872350.0 + t2 * (566098157625.0 - t2 * 188699385875.0))))) /
        6688604160.0;
    const double u6 =
        t2 * t2 * t2 *
        (2401245.0 / 4194304.0 +
         t2 * (-388895895.0 / 14680064.0 +
               t2 * (1441372804469.0 / 6606028800.0 +
                     t2 * (-33010308331.0 / 47185920.0 +
                           t2 * (4445922195.0 / 4194304.0 +
                                 t2 * (-1169936192425.0 / 1528823808.0 +
                                       t2 * (5849680962125.0 / 27518828544.0)))))));

    const double inv_nu = 1.0 / nu;
    const double series =
        1.0 + inv_nu * (u1 + inv_nu * (u2 + inv_nu * (u3 + inv_nu * (u4 + inv_nu * (u5 + inv_nu * u6)))));
    if (!(series > 0.0) || !std::isfinite(series)) {
        throw numerical_error("bessel: uniform expansion out of range");
    }
    return nu * eta - 0.5 * (kLn2Pi + std::log(nu)) - 0.5 * std::log(w) + std::log(series);
}

constexpr int64_t kUniformMinOrder = 40;

}  // namespace

double log_bessel_i(int64_t n, double x) {
    if (n < 0) n = -n;
    if (!(x > 0.0) || !std::isfinite(x)) throw contract_error("log_bessel_i: x must be > 0");
    if (8.0 * static_cast<double>(n) * static_cast<double>(n) <= x) {
        return log_bessel_i_large_arg(n, x);
    }
    if (n >= kUniformMinOrder) {
        return log_bessel_i_uniform(static_cast<double>(n), x);
    }
    // Small order but sizable n^2/x: seed two orders above the uniform-expansion
    // threshold and recurse downward (the stable direction for I) in
    // e^{-x}-scaled space. I_{nu-1} = I_{nu+1} + (2 nu / x) I_nu.
    const int64_t m = kUniformMinOrder + 2;
    double i_hi = std::exp(log_bessel_i_uniform(static_cast<double>(m + 1), x) - x);
    double i_lo = std::exp(log_bessel_i_uniform(static_cast<double>(m), x) - x);
    if (!(i_lo > 0.0)) {
        throw numerical_error("bessel: scaled recurrence underflow, argument too small for branch");
    }
    for (int64_t nu = m; nu > n; --nu) {
        const double next = i_hi + (2.0 * static_cast<double>(nu) / x) * i_lo;
        i_hi = i_lo;
        i_lo = next;
        if (!std::isfinite(i_lo)) {
            throw numerical_error("bessel: scaled recurrence overflow");
        }
    }
    return std::log(i_lo) + x;
}

double skellam_nll_bits_bessel(int64_t k, double mu) {
    // P(k) = e^{-2 mu} I_|k|(2 mu) for equal rates.
    const double log_p = -2.0 * mu + log_bessel_i(k, 2.0 * mu);
    if (!std::isfinite(log_p)) throw numerical_error("skellam bessel: non-finite log probability");
    return -log_p / kLn2;
}

}  // namespace detail

double skellam_log_pmf(int64_t k, const SkellamParams& params) {
    params.validate();
    const int64_t centered = k - params.mean_index();
    const double mu = params.rate();
    const double bits = mu <= detail::kConvolutionMaxRate
                            ? detail::skellam_nll_bits_convolution(centered, mu)
                            : detail::skellam_nll_bits_bessel(centered, mu);
    if (!std::isfinite(bits)) throw numerical_error("skellam_log_pmf: non-finite result");
    return bits;
}

QuantizedMatrix skellam_sample(const SkellamParams& params, int64_t rows, int64_t cols,
                               Philox& rng) {
    params.validate();
    if (rows < 1 || cols < 1) throw contract_error("skellam_sample: shape must be nonempty");
    QuantizedMatrix out(rows, cols, params.lattice);
    const double mu = params.rate();
    const int64_t shift = params.mean_index();
    for (int64_t i = 0; i < rows * cols; ++i) {
        const int64_t p1 = sample_poisson(rng, mu);
        const int64_t p2 = sample_poisson(rng, mu);
        out.idx[static_cast<size_t>(i)] = shift + p1 - p2;
    }
    return out;
}

double total_code_length(const QuantizedMatrix& data, const SkellamParams& params) {
    params.validate();
    if (data.empty()) return 0.0;
    if (!(data.lattice == params.lattice)) {
        throw contract_error("total_code_length: data and params lattices differ");
    }
    std::unordered_map<int64_t, double> cache;
    cache.reserve(256);
    double total = 0.0;
    for (const int64_t k : data.idx) {
        auto it = cache.find(k);
        if (it == cache.end()) it = cache.emplace(k, skellam_log_pmf(k, params)).first;
        total += it->second;
    }
    return total;
}

double skellam_entropy_bits(const SkellamParams& params) {
    params.validate();
    const double mu = params.rate();
    const double std_idx = std::sqrt(2.0 * mu);
    const int64_t reach = static_cast<int64_t>(std::ceil(16.0 * std_idx)) + 60;
    const int64_t shift = params.mean_index();
    double h = 0.0;
    double mass = 0.0;
    for (int64_t k = 0; k <= reach; ++k) {
        const double bits = skellam_log_pmf(shift + k, params);
        const double p = std::exp2(-bits);
        const double contribution = (k == 0 ? 1.0 : 2.0) * p;  // symmetric about the mean
        h += contribution * bits;
        mass += contribution;
        if (k > 4.0 * std_idx && contribution < 1e-17) break;
    }
    if (std::fabs(mass - 1.0) > 1e-9) {
        throw numerical_error("skellam_entropy_bits: truncated mass does not reach 1");
    }
    return h;
}

double discretized_gaussian_nll_bits_value(double z_value, double mean, double stddev,
                                           double spacing) {
    if (!(stddev > 0.0)) throw contract_error("discretized_gaussian_nll_bits: std must be > 0");
    const double d = (z_value - mean) / stddev;
    return (0.5 * d * d + std::log(stddev) + 0.5 * kLn2Pi - std::log(spacing)) / kLn2;
}

double discretized_gaussian_nll_bits(std::span<const int64_t> z, std::span<const double> mean,
                                     std::span<const double> stddev, Lattice lattice) {
    lattice.validate();
    if (z.size() != mean.size() || z.size() != stddev.size()) {
        throw contract_error("discretized_gaussian_nll_bits: length mismatch");
    }
    double total = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        total += discretized_gaussian_nll_bits_value(static_cast<double>(z[i]) * lattice.spacing,
                                                     mean[i], stddev[i], lattice.spacing);
    }
    return total;
}

}  // namespace repc::codelen
