#pragma once

#include <cstdint>
#include <utility>

namespace lsh::rng {

/// Threefry-2x64, 20 rounds. A keyed counter-based bijection: every
/// (counter, key) pair yields an independent 128-bit block, so draws can be
/// indexed by (seed, path, step, draw) and are identical no matter which
/// thread produces them.
std::pair<std::uint64_t, std::uint64_t> threefry2x64(std::uint64_t c0, std::uint64_t c1,
                                                     std::uint64_t k0, std::uint64_t k1);

/// Uniform double strictly inside (0, 1) from the top 53 bits of a block.
double uniform_open(std::uint64_t c0, std::uint64_t c1, std::uint64_t k0, std::uint64_t k1);

/// Inverse of the standard normal CDF (Wichura's PPND16), accurate to
/// near machine precision over (0, 1).
double normal_icdf(double p);

/// One standard normal variate per (counter, key).
double normal(std::uint64_t c0, std::uint64_t c1, std::uint64_t k0, std::uint64_t k1);

/// Counter value reserved for initial-condition draws (never a step index).
inline constexpr std::uint64_t kInitCounter = ~std::uint64_t{0};

/// Per-path stream keyed by (seed, path index); draws are addressed by
/// (step, draw) and are reproducible independent of call order.
class PathStream {
  public:
    PathStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

    double normal(std::uint64_t step, std::uint64_t draw) const {
        return rng::normal(step, draw, seed_, path_);
    }
    double uniform(std::uint64_t step, std::uint64_t draw) const {
        return rng::uniform_open(step, draw, seed_, path_);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t path() const { return path_; }

  private:
    std::uint64_t seed_;
    std::uint64_t path_;
};

}  // namespace lsh::rng
