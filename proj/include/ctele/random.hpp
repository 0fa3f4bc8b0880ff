#pragma once

#include <cstdint>
#include <random>

namespace ctele {

/// Seed used whenever the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20080917ULL;

/// Seeded generator with platform-independent sampling.
///
/// std::mt19937_64's output sequence is fixed by the standard but the
/// standard distributions are not, so uniform and normal draws are built
/// directly from the raw engine output.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = kDefaultSeed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller, caching the second variate.
    double normal();

    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace ctele
