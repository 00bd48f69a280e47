#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fbc {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is a keyed hash of i, so a stream
/// is fully identified by its key and nothing depends on execution order.
///
/// Streams are derived hierarchically with split(), e.g.
/// `CounterRng(seed).split(rep).split(group)`. Satisfies
/// UniformRandomBitGenerator so it works with <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return mix64(key_ ^ mix64(counter_++ + 0x3c6ef372fe94f82bULL));
    }

    /// Independent child stream keyed by (this key, id). Does not advance this stream.
    [[nodiscard]] constexpr CounterRng split(std::uint64_t id) const noexcept {
        CounterRng child;
        child.key_ = mix64(key_ + mix64(id ^ 0xa54ff53a5f1d36f1ULL));
        return child;
    }

    [[nodiscard]] constexpr CounterRng split(std::initializer_list<std::uint64_t> ids) const noexcept {
        CounterRng r = *this;
        for (auto id : ids) r = r.split(id);
        return r;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Named stream ids, so call sites read as `rng.split(stream::folds)`.
namespace stream {
inline constexpr std::uint64_t train = 1;
inline constexpr std::uint64_t test = 2;
inline constexpr std::uint64_t folds = 3;
inline constexpr std::uint64_t labels = 4;
inline constexpr std::uint64_t scores = 5;
inline constexpr std::uint64_t noise = 6;
inline constexpr std::uint64_t repetition = 7;
}  // namespace stream

}  // namespace fbc
