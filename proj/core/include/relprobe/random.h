#ifndef RELPROBE_RANDOM_H_
#define RELPROBE_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace relprobe {

// SplitMix64 finalizer. Used to expand one user seed into independent
// per-(repeat, fold) or per-batch seeds:
//   DeriveSeed(s, a, b) = mix(mix(mix(s) ^ a) ^ b)
std::uint64_t SplitMix64(std::uint64_t x);
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a,
                         std::uint64_t b = 0);

// Portable random source. std::mt19937_64 has a fully specified output
// sequence; the standard distributions do not, so the few we need are
// implemented here to keep results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(SplitMix64(seed)) {}

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, bound), rejection sampled (no modulo bias).
  std::uint64_t Below(std::uint64_t bound);
  // Standard normal via Box-Muller; caches the second variate.
  double Normal();

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace relprobe

#endif  // RELPROBE_RANDOM_H_
