#pragma once

// Deterministic hashing and random-number machinery. Every random quantity in
// the library (tree structure, rollouts, weight init, shuffles) is derived
// from these fixed constants, so datasets, models, and reports are
// reproducible bit-for-bit. The constants below are part of that contract;
// changing them changes every downstream artifact.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace catval {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: a full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Folds one token into a running hash.
inline std::uint64_t hash_chain(std::uint64_t h, std::uint64_t token) {
  return mix64(h + kGolden + token);
}

// Hash of a token sequence under a seed. Used to derive independent
// per-(problem, solution, step, rollout) seeds so parallel schedules cannot
// change results.
inline std::uint64_t hash_tokens(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tokens) {
  std::uint64_t h = mix64(seed + kGolden);
  for (std::uint64_t t : tokens) h = hash_chain(h, t);
  return h;
}

// Domain-separation tags for derived seeds.
inline constexpr std::uint64_t kTagEdge = 1;      // env edge scores
inline constexpr std::uint64_t kTagSolution = 2;  // annotation solution rollouts
inline constexpr std::uint64_t kTagMc = 3;        // annotation MC rollouts
inline constexpr std::uint64_t kTagInit = 4;      // verifier weight init
inline constexpr std::uint64_t kTagShuffle = 5;   // per-epoch shuffles
inline constexpr std::uint64_t kTagBon = 6;       // best-of-n candidates
inline constexpr std::uint64_t kTagBeam = 7;      // beam-search sampling

// SplitMix64 stream generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1).
  double next_signed() { return 2.0 * next_double() - 1.0; }

  // Inverse-CDF draw from a probability vector. The final index absorbs any
  // rounding deficit in the cumulative sum.
  std::size_t sample_categorical(std::span<const double> probs) {
    double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return probs.size() - 1;
  }

 private:
  std::uint64_t state_;
};

// FNV-1a over raw bytes; used for file and config digests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

// 16-char lowercase hex digest.
inline std::string hex64(std::uint64_t x) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[x & 0xF];
    x >>= 4;
  }
  return out;
}

}  // namespace catval
