#include "repc/rng.hpp"

#include <cmath>

namespace repc {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline void philox_round(uint32_t ctr[4], uint32_t k0, uint32_t k1) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1);
    const uint32_t c1 = ctr[1];
    const uint32_t c3 = ctr[3];
    ctr[0] = hi1 ^ c1 ^ k0;
    ctr[1] = lo1;
    ctr[2] = hi0 ^ c3 ^ k1;
    ctr[3] = lo0;
}

}  // namespace

Philox::Philox(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {
    const uint64_t k = splitmix64(seed);
    key_[0] = static_cast<uint32_t>(k);
    key_[1] = static_cast<uint32_t>(k >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<uint32_t>(stream);
    ctr_[3] = static_cast<uint32_t>(stream >> 32);
}

void Philox::refill() {
    uint32_t c[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
    uint32_t k0 = key_[0];
    uint32_t k1 = key_[1];
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    out_[0] = c[0];
    out_[1] = c[1];
    out_[2] = c[2];
    out_[3] = c[3];
    have_ = 4;
    // 64-bit block index in the low counter words; the stream id above stays fixed.
    if (++ctr_[0] == 0) ++ctr_[1];
}

uint32_t Philox::next_u32() {
    if (have_ == 0) refill();
    return out_[4 - have_--];
}

uint64_t Philox::next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Philox::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

uint64_t Philox::next_below(uint64_t n) {
    if (n == 0) throw contract_error("next_below: n must be >= 1");
    if (n == 1) return 0;
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
        const uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

namespace {

// Hormann (1993) PTRS: transformed rejection with squeeze, valid for mu >= 10.
int64_t poisson_ptrs(Philox& g, double mu) {
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        const double u = g.next_double() - 0.5;
        const double v = g.next_double_open();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mu - mu - std::lgamma(kf + 1.0)) {
            return static_cast<int64_t>(kf);
        }
    }
}

}  // namespace

int64_t sample_poisson(Philox& g, double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw contract_error("sample_poisson: rate must be positive and finite");
    }
    if (mu < 10.0) {
        const double limit = std::exp(-mu);
        int64_t k = 0;
        double prod = 1.0;
        do {
            ++k;
            prod *= g.next_double_open();
        } while (prod > limit);
        return k - 1;
    }
    return poisson_ptrs(g, mu);
}

}  // namespace repc
