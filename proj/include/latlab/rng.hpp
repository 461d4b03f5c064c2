#pragma once

#include <cstdint>

namespace latlab {

/// Counter-based random substream. The k-th draw of stream
/// (seed, domain, counter) is a pure function of those integers, so sample i
/// of an estimator can be evaluated by any worker in any order with identical
/// results; worker count never changes an estimate.
///
/// Construction mixes the three keys through the splitmix64 finalizer; draws
/// then advance a splitmix64 sequence. Streams with distinct keys are
/// decorrelated by the 64-bit avalanche of the mixer.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t counter) {
    state_ = mix(seed + 0x9E3779B97F4A7C15ull);
    state_ = mix(state_ ^ (domain + 0xD1B54A32D192ED03ull));
    state_ = mix(state_ ^ (counter + 0x8CB92BA72F3D8DD7ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the left-open interval (a, b]. Matches the orientation of the
  /// offset cube, whose cells are open below and closed above.
  double left_open(double a, double b) {
    return b - (b - a) * uniform01();
  }

  /// Uniform on the right-open interval [a, b).
  double closed_open(double a, double b) {
    return a + (b - a) * uniform01();
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t state_;
};

// Stream domains. Estimators draw from disjoint domains so that runs sharing
// one experiment seed stay independent of each other.
namespace stream_domain {
inline constexpr std::uint64_t kOffsetSampling = 1;   // q draws for V(S)
inline constexpr std::uint64_t kPointSampling = 2;    // x draws for near-fixed volume
inline constexpr std::uint64_t kCountSampling = 3;    // q draws for the k integral
inline constexpr std::uint64_t kMarginSampling = 4;   // x draws for margin checks
inline constexpr std::uint64_t kSystemGeneration = 5; // randomized test instances
}  // namespace stream_domain

}  // namespace latlab
