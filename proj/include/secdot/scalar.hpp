#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <type_traits>

#include "secdot/error.hpp"

namespace secdot {

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

// Element of the prime field Z_P. The value is always the canonical
// representative in [0, P). P must be prime for inv() to be meaningful.
template <std::uint64_t P>
class ModInt {
  static_assert(P >= 2 && P <= kMersenne61, "modulus must fit in 61 bits");

 public:
  static constexpr std::uint64_t kModulus = P;

  constexpr ModInt() = default;
  constexpr explicit ModInt(std::uint64_t v) : value_(v % P) {}

  static constexpr ModInt from_signed(std::int64_t v) {
    if (v >= 0) return ModInt(static_cast<std::uint64_t>(v));
    // -(v) without overflow for INT64_MIN.
    std::uint64_t mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
    return -ModInt(mag);
  }

  constexpr std::uint64_t value() const { return value_; }

  // Values above P/2 are read as negatives.
  constexpr std::int64_t to_signed() const {
    return value_ > P / 2 ? -static_cast<std::int64_t>(P - value_)
                          : static_cast<std::int64_t>(value_);
  }

  constexpr bool is_zero() const { return value_ == 0; }

  friend constexpr ModInt operator+(ModInt x, ModInt y) {
    std::uint64_t s = x.value_ + y.value_;
    if (s >= P) s -= P;
    return raw(s);
  }
  friend constexpr ModInt operator-(ModInt x, ModInt y) {
    return raw(x.value_ >= y.value_ ? x.value_ - y.value_
                                    : x.value_ + P - y.value_);
  }
  friend constexpr ModInt operator*(ModInt x, ModInt y) {
    unsigned __int128 prod =
        static_cast<unsigned __int128>(x.value_) * y.value_;
    return raw(reduce(prod));
  }
  constexpr ModInt operator-() const { return raw(value_ == 0 ? 0 : P - value_); }

  ModInt& operator+=(ModInt o) { return *this = *this + o; }
  ModInt& operator-=(ModInt o) { return *this = *this - o; }
  ModInt& operator*=(ModInt o) { return *this = *this * o; }

  friend constexpr bool operator==(ModInt x, ModInt y) = default;

  constexpr ModInt pow(std::uint64_t e) const {
    ModInt base = *this;
    ModInt acc = raw(1 % P);
    while (e != 0) {
      if (e & 1) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  // Fermat inverse.
  ModInt inv() const {
    if (value_ == 0) fail(ErrorKind::kDomain, "no inverse of zero");
    return pow(P - 2);
  }

  friend std::ostream& operator<<(std::ostream& os, ModInt x) {
    return os << x.value_;
  }

 private:
  static constexpr ModInt raw(std::uint64_t v) {
    ModInt m;
    m.value_ = v;
    return m;
  }

  static constexpr std::uint64_t reduce(unsigned __int128 x) {
    if constexpr (P == kMersenne61) {
      // x < 2^122, so two folds bring it below 2P.
      std::uint64_t lo = static_cast<std::uint64_t>(x) & P;
      std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
      std::uint64_t s = lo + hi;
      s = (s & P) + (s >> 61);
      return s >= P ? s - P : s;
    } else {
      return static_cast<std::uint64_t>(x % P);
    }
  }

  std::uint64_t value_ = 0;
};

using Fp = ModInt<kMersenne61>;

inline Fp field_inv(Fp x) { return x.inv(); }

template <class T>
struct is_mod_int : std::false_type {};
template <std::uint64_t P>
struct is_mod_int<ModInt<P>> : std::true_type {};
template <class T>
inline constexpr bool is_mod_int_v = is_mod_int<T>::value;

// Deterministic 64-bit generator used for every random draw in the library.
using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a list of words into a child seed of `seed`.
template <class... Words>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Words... words) {
  std::uint64_t h = mix64(seed);
  ((h = mix64(h ^ static_cast<std::uint64_t>(words))), ...);
  return h;
}

// Stream tags for derive_seed.
enum class SeedTag : std::uint64_t {
  kData = 0x64617461,
  kMask = 0x6d61736b,
  kAlpha = 0x616c7068,
  kReRandoms = 0x72657272,
  kRotation = 0x726f7461,
};

// Operations the protocols need from a scalar type, beyond + - * and ==.
template <class T>
struct ScalarTraits;

template <std::uint64_t P>
struct ScalarTraits<ModInt<P>> {
  using Scalar = ModInt<P>;
  static constexpr bool kExact = true;
  static Scalar zero() { return Scalar(0); }
  static Scalar one() { return Scalar(1); }
  static Scalar inv(Scalar x) { return x.inv(); }
  static bool is_zero(Scalar x) { return x.is_zero(); }

  static Scalar sample(Rng& rng) {
    if constexpr (P == kMersenne61) {
      for (;;) {
        std::uint64_t v = rng() & kMersenne61;
        if (v != kMersenne61) return Scalar(v);
      }
    } else {
      constexpr std::uint64_t limit =
          std::numeric_limits<std::uint64_t>::max() -
          std::numeric_limits<std::uint64_t>::max() % P;
      for (;;) {
        std::uint64_t v = rng();
        if (v < limit) return Scalar(v % P);
      }
    }
  }
  static Scalar sample_nonzero(Rng& rng) {
    for (;;) {
      Scalar s = sample(rng);
      if (!s.is_zero()) return s;
    }
  }

  static std::uint64_t to_wire(Scalar x) { return x.value(); }
  static Scalar from_wire(std::uint64_t w) {
    if (w >= P) fail(ErrorKind::kFraming, "field element out of range on wire");
    return Scalar(w);
  }
};

// Float parity domain. Masks are drawn from [-1, 1), mask scalars from
// [0.5, 2); there is no uniform distribution over the reals.
template <>
struct ScalarTraits<double> {
  using Scalar = double;
  static constexpr bool kExact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double inv(double x) {
    if (x == 0.0) fail(ErrorKind::kDomain, "no inverse of zero");
    return 1.0 / x;
  }
  static bool is_zero(double x) { return x == 0.0; }

  // 53 random mantissa bits mapped to [-1, 1).
  static double sample(Rng& rng) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }
  static double sample_nonzero(Rng& rng) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 0.5 + 1.5 * u;
  }

  static std::uint64_t to_wire(double x) {
    std::uint64_t w;
    std::memcpy(&w, &x, sizeof w);
    return w;
  }
  static double from_wire(std::uint64_t w) {
    double x;
    std::memcpy(&x, &w, sizeof x);
    return x;
  }
};

// Embeds reals into Fp by scaling with 2^scale_bits and rounding.
class FixedPointCodec {
 public:
  explicit FixedPointCodec(unsigned scale_bits = 16);

  unsigned scale_bits() const { return scale_bits_; }

  // Largest magnitude (exclusive) accepted by encode().
  double max_magnitude() const { return std::ldexp(1.0, 60 - int(scale_bits_)); }

  Fp encode(double x) const;
  double decode(Fp x) const;

  // Decodes a product-sum of two encodings (scale 2^(2*scale_bits)). Inputs
  // whose true value exceeds 2^(60 - 2*scale_bits) wrap silently.
  double decode_dot(Fp x) const;

 private:
  unsigned scale_bits_;
};

inline Fp fx_encode(double x, const FixedPointCodec& codec) {
  return codec.encode(x);
}
inline double fx_decode_dot(Fp x, const FixedPointCodec& codec) {
  return codec.decode_dot(x);
}

// The arithmetic domain shared by all parties of one run.
struct ScalarDomain {
  enum class Kind { kField, kFloat64 };

  Kind kind = Kind::kField;
  unsigned scale_bits = 16;

  static ScalarDomain field(unsigned scale_bits = 16) {
    return {Kind::kField, scale_bits};
  }
  static ScalarDomain float64() { return {Kind::kFloat64, 0}; }

  bool is_field() const { return kind == Kind::kField; }
  FixedPointCodec codec() const { return FixedPointCodec(scale_bits); }
  std::string name() const { return is_field() ? "field" : "float"; }

  friend bool operator==(const ScalarDomain&, const ScalarDomain&) = default;
};

}  // namespace secdot
