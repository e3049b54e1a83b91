#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace hhr {

// Philox4x32-10 counter-based generator.  A stream is fully determined by
// (seed, stream, substream); the block counter advances internally.  Two
// streams never share a counter, so per-path generators can be created
// independently on any thread and in any order.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();

  // Raw bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, Key key);

 private:
  void refill();

  Key key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
};

// Sub-stream identifiers shared by the simulators.
enum class Substream : std::uint32_t { Hawkes = 0, Brownian = 1, Oracle = 2 };

inline Philox4x32 make_stream(std::uint64_t seed, std::uint64_t path, Substream sub) {
  return Philox4x32(seed, path, static_cast<std::uint32_t>(sub));
}

// Box-Muller with the second variate cached.
class NormalSampler {
 public:
  template <class URBG>
  double operator()(URBG& gen) {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = to_open_unit(gen());
    const double u2 = to_open_unit(gen());
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  void reset() { has_cached_ = false; }

 private:
  static double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hhr
