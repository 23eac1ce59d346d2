#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

// Counter-based deterministic random numbers. Every stream is a pure
// function of a 64-bit key and a draw counter, so any trial is
// reproducible in isolation and results do not depend on thread count
// or evaluation order.

namespace btm::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// splitmix64 output function (invertible 64-bit mix).
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Folds one tag into a key. Chained to derive child keys; both halves of
/// the composition are bijections of their argument.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) {
  return mix64(key ^ mix64(tag + kGolden));
}

/// Map z in Z to a non-negative integer (0, -1, 1, -2, 2, ... interleaved).
inline std::uint64_t zigzag(std::int64_t z) {
  return z >= 0 ? 2ull * static_cast<std::uint64_t>(z)
                : 2ull * static_cast<std::uint64_t>(-(z + 1)) + 1ull;
}

/// Uniform double in the open interval (0,1): (k + 1/2) * 2^-52 over 52-bit
/// k, so both endpoints stay representable strictly inside (0,1).
inline double to_open01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

/// Sequential stream: splitmix64 seeded at `key`.
class Stream {
public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  static Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = mix64(seed);
    for (std::uint64_t tag : path) k = derive_key(k, tag);
    return Stream(k);
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  double next_open01() { return to_open01(next_u64()); }

  /// Exponential with unit mean.
  double next_exponential() { return -std::log(next_open01()); }

  bool next_bool() { return (next_u64() >> 63) != 0; }

private:
  std::uint64_t state_;
};

/// Fair +/-1 steps, 64 per underlying draw. Used for long simple-random-walk
/// simulations where per-step stream draws would dominate.
class StepStream {
public:
  explicit StepStream(Stream s) : stream_(s) {}

  int next_step() {
    if (left_ == 0) {
      bits_ = stream_.next_u64();
      left_ = 64;
    }
    int step = (bits_ & 1ull) ? 1 : -1;
    bits_ >>= 1;
    --left_;
    return step;
  }

private:
  Stream stream_;
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

// Salts separating independent uses of the same seed.
inline constexpr std::uint64_t kLandscapeSalt = 0x6c616e6473636170ull;  // "landscap"
inline constexpr std::uint64_t kPathSalt = 0x7061746873747265ull;
inline constexpr std::uint64_t kPanelSalt = 0x70616e656c747269ull;
inline constexpr std::uint64_t kScenarioSalt = 0x7363656e6172696full;

/// Per-site uniform for a trapping landscape: pure in (seed, z).
inline double site_uniform(std::uint64_t seed, std::int64_t z) {
  std::uint64_t k = derive_key(mix64(seed ^ kLandscapeSalt), zigzag(z));
  return to_open01(k);
}

}  // namespace btm::rng
