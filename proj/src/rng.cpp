#include "levyflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace levyflow {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t RngStream::next_u64() {
    if (consumed_ >= 4) {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
        block_ = philox4x32_10(ctr, key);
        ++counter_;
        consumed_ = 0;
    }
    const std::uint64_t lo = block_[consumed_];
    const std::uint64_t hi = block_[consumed_ + 1];
    consumed_ += 2;
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

double RngStream::exponential() { return -std::log(uniform()); }

std::uint64_t RngStream::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 500.0) {
        // normal approximation is adequate far beyond the regimes used here
        const double v = std::round(mean + std::sqrt(mean) * normal());
        return v < 0.0 ? 0 : static_cast<std::uint64_t>(v);
    }
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p < 1e-300 && cdf >= 1.0 - 1e-15) break;
    }
    return k;
}

} // namespace levyflow
