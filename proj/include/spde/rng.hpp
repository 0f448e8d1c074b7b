#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace spde {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
// pure function of (key, counter), so streams can be addressed directly by
// (seed, path, time, space) without any shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  static Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// splitmix64 finalizer; used to derive independent keys from (seed, stream).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0, 1) from 32 random bits; never 0 or 1.
inline double u01_open(std::uint32_t x) { return (static_cast<double>(x) + 0.5) * 0x1p-32; }

// Uniform on the midpoints of a 2^-52 grid: never 0, never 1. A 53-bit grid
// would need 54 bits for its top midpoint and round to 1.
inline double u01_52(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) | (lo >> 12);
  return (static_cast<double>(bits) + 0.5) * 0x1p-52;
}

// Two standard normals from one Philox block (Box-Muller, 52-bit uniforms).
inline std::array<double, 2> normal_pair(const Philox4x32::Counter& c) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double u1 = u01_52(c[0], c[1]);
  const double u2 = u01_52(c[2], c[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

// Sequential stream over one key: counter word 0 increments, words 1..3 fixed.
// Satisfies UniformRandomBitGenerator so <random> distributions accept it.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  PhiloxStream(std::uint64_t seed, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3)
      : key_(Philox4x32::key_from_seed(seed)), ctr_{0, c1, c2, c3} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      buf_ = Philox4x32::block(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return buf_[pos_++];
  }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
};

// Ziggurat tables for the standard normal, 128 layers (Marsaglia-Tsang with
// Doornik's independent-bits layout). x[0] is the virtual base width V/f(R).
struct ZigguratTables {
  std::array<double, 129> x{};
  std::array<double, 128> ratio{};       // x[i+1] / x[i]
  std::array<std::int32_t, 128> bound{};  // ceil(ratio * 2^24)
  std::array<double, 128> scale{};        // x[i] * 2^-24
};

inline constexpr double kZigguratR = 3.442619855899;
inline constexpr double kZigguratV = 9.91256303526217e-3;

inline const ZigguratTables& ziggurat_tables() {
  static const ZigguratTables t = [] {
    ZigguratTables z;
    double f = std::exp(-0.5 * kZigguratR * kZigguratR);
    z.x[0] = kZigguratV / f;
    z.x[1] = kZigguratR;
    z.x[128] = 0.0;
    for (int i = 2; i < 128; ++i) {
      z.x[i] = std::sqrt(-2.0 * std::log(kZigguratV / z.x[i - 1] + f));
      f = std::exp(-0.5 * z.x[i] * z.x[i]);
    }
    for (int i = 0; i < 128; ++i) {
      z.ratio[i] = z.x[i + 1] / z.x[i];
      z.bound[i] = static_cast<std::int32_t>(std::ceil(z.ratio[i] * 0x1p24));
      z.scale[i] = z.x[i] * 0x1p-24;
    }
    return z;
  }();
  return t;
}

// Standard normal from one 32-bit word: bits 0..6 pick the layer and bits
// 8..31 give the signed position u = (2j + 1) 2^-24 in (-1, 1). About 2.8% of
// words miss the rectangles; those draw further words from make_stream(),
// called at most once, so the result is a pure function of (word, stream).
template <class MakeStream>
double ziggurat_normal(std::uint32_t word, MakeStream&& make_stream) {
  const ZigguratTables& z = ziggurat_tables();
  auto odd = [](std::uint32_t w) { return 2 * (static_cast<std::int32_t>(w) >> 8) + 1; };
  unsigned i = word & 0x7Fu;
  std::int32_t j = odd(word);
  if ((j < 0 ? -j : j) < z.bound[i]) return j * z.scale[i];
  auto g = make_stream();
  for (;;) {
    const double u = j * 0x1p-24;
    if (i == 0) {
      double x = 0.0;
      double y = 0.0;
      do {
        x = std::log(u01_open(g())) / kZigguratR;
        y = std::log(u01_open(g()));
      } while (-2.0 * y < x * x);
      return u < 0.0 ? x - kZigguratR : kZigguratR - x;
    }
    const double x = u * z.x[i];
    const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
    if (f1 + u01_open(g()) * (f0 - f1) < 1.0) return x;
    const std::uint32_t w = g();
    i = w & 0x7Fu;
    j = odd(w);
    if ((j < 0 ? -j : j) < z.bound[i]) return j * z.scale[i];
  }
}

}  // namespace spde
