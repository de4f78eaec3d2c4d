#pragma once

#include <array>
#include <cstdint>

namespace levyflow {

/// Philox4x32-10 block function (Salmon et al., SC'11).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. Used as
/// the engine behind RngStream so that any (seed, stream, position) triple can
/// be regenerated without replaying earlier draws.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// The key is the master seed; the counter's upper 64 bits carry the stream id
/// and the lower 64 bits the block position. Streams with distinct ids are
/// disjoint subsequences of the same Philox permutation, and replaying
/// (seed, stream_id) reproduces the draws bit-for-bit.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : seed_(master_seed), stream_(stream_id) {}

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Exponential with unit mean.
    double exponential();
    /// Poisson variate by sequential inversion; intended for small means.
    std::uint64_t poisson(double mean);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int consumed_ = 4; // in 32-bit words
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// Stream ids for distinct purposes inside one experiment. The tag occupies the
/// high 16 bits so replica indices never collide across purposes.
constexpr std::uint64_t stream_id(std::uint64_t tag, std::uint64_t index) {
    return (tag << 48) ^ index;
}

/// Purposes that own a tag in stream_id.
enum class StreamTag : std::uint64_t {
    Sampler = 1,
    Semigroup = 2,
    GradientScaling = 3,
    NegativeMoment = 4,
    Zvonkin = 5,
    Flow = 6,
    Bismut = 7,
    Uniqueness = 8,
    Decay = 9,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t index) {
    return stream_id(static_cast<std::uint64_t>(tag), index);
}

} // namespace levyflow
