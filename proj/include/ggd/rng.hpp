#pragma once

#include <cstdint>
#include <string_view>

namespace ggd {

/// Counter-based generator: output k is a SplitMix64 finalisation of
/// (key + k * golden). Identical on every platform for a given
/// (seed, stream) pair and call sequence.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);
    Rng(std::uint64_t seed, std::string_view stream_name);

    std::uint64_t next_u64();
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform float in [0, 1) with 24 random bits.
    float uniform_float();
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// FNV-1a, used for stream names and content checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

/// Named streams kept apart so that e.g. toggling augmentation never
/// shifts the weight-init sequence.
namespace streams {
inline constexpr std::string_view init = "init";
inline constexpr std::string_view corrupt = "corrupt";
inline constexpr std::string_view dropout = "dropout";
inline constexpr std::string_view sample = "sample";
inline constexpr std::string_view probe = "probe";
inline constexpr std::string_view data = "data";
}  // namespace streams

}  // namespace ggd
