#pragma once
// Bit-level IEEE-754 binary32/binary64 utilities and software format
// conversion under all four rounding modes. Everything here is pure bit
// manipulation: no operation depends on the ambient floating-point
// environment, so results are identical on every host.

#include <bit>
#include <cstdint>
#include <optional>

namespace crvec {

enum class RoundingMode : unsigned {
  NearestEven = 0,
  TowardZero = 1,
  TowardPositive = 2,
  TowardNegative = 3,
};

inline constexpr RoundingMode all_rounding_modes[4] = {
    RoundingMode::NearestEven, RoundingMode::TowardZero,
    RoundingMode::TowardPositive, RoundingMode::TowardNegative};

const char* rounding_mode_name(RoundingMode m) noexcept;

// Value-semantic wrappers around the raw bit patterns. Bijective with the
// 2^32 / 2^64 patterns; NaN payloads survive any decompose/compose trip.
struct Binary32 {
  std::uint32_t bits = 0;

  Binary32() = default;
  constexpr explicit Binary32(std::uint32_t b) : bits(b) {}

  static Binary32 from_float(float f) noexcept { return Binary32(std::bit_cast<std::uint32_t>(f)); }
  float to_float() const noexcept { return std::bit_cast<float>(bits); }

  constexpr std::uint32_t sign() const noexcept { return bits >> 31; }
  constexpr std::uint32_t biased_exponent() const noexcept { return (bits >> 23) & 0xFFu; }
  constexpr std::uint32_t mantissa_field() const noexcept { return bits & 0x7FFFFFu; }

  constexpr bool is_nan() const noexcept { return biased_exponent() == 0xFF && mantissa_field() != 0; }
  constexpr bool is_inf() const noexcept { return biased_exponent() == 0xFF && mantissa_field() == 0; }
  constexpr bool is_zero() const noexcept { return (bits & 0x7FFFFFFFu) == 0; }
  constexpr bool is_finite() const noexcept { return biased_exponent() != 0xFF; }
  constexpr bool is_subnormal() const noexcept { return biased_exponent() == 0 && mantissa_field() != 0; }

  friend constexpr bool operator==(Binary32 a, Binary32 b) noexcept { return a.bits == b.bits; }
};

struct Binary64 {
  std::uint64_t bits = 0;

  Binary64() = default;
  constexpr explicit Binary64(std::uint64_t b) : bits(b) {}

  static Binary64 from_double(double d) noexcept { return Binary64(std::bit_cast<std::uint64_t>(d)); }
  double to_double() const noexcept { return std::bit_cast<double>(bits); }

  constexpr std::uint64_t sign() const noexcept { return bits >> 63; }
  constexpr std::uint64_t biased_exponent() const noexcept { return (bits >> 52) & 0x7FFu; }
  constexpr std::uint64_t mantissa_field() const noexcept { return bits & 0xFFFFFFFFFFFFFull; }

  constexpr bool is_nan() const noexcept { return biased_exponent() == 0x7FF && mantissa_field() != 0; }
  constexpr bool is_inf() const noexcept { return biased_exponent() == 0x7FF && mantissa_field() == 0; }
  constexpr bool is_zero() const noexcept { return (bits & 0x7FFFFFFFFFFFFFFFull) == 0; }
  constexpr bool is_finite() const noexcept { return biased_exponent() != 0x7FF; }
  constexpr bool is_subnormal() const noexcept { return biased_exponent() == 0 && mantissa_field() != 0; }

  friend constexpr bool operator==(Binary64 a, Binary64 b) noexcept { return a.bits == b.bits; }
};

inline constexpr Binary32 f32_pos_inf{0x7F800000u};
inline constexpr Binary32 f32_neg_inf{0xFF800000u};
inline constexpr Binary32 f32_pos_zero{0x00000000u};
inline constexpr Binary32 f32_neg_zero{0x80000000u};
inline constexpr Binary32 f32_qnan{0x7FC00000u};
inline constexpr Binary32 f32_max_finite{0x7F7FFFFFu};

inline constexpr Binary64 f64_pos_inf{0x7FF0000000000000ull};
inline constexpr Binary64 f64_neg_inf{0xFFF0000000000000ull};
inline constexpr Binary64 f64_qnan{0x7FF8000000000000ull};
inline constexpr Binary64 f64_max_finite{0x7FEFFFFFFFFFFFFFull};

struct Decomposed64 {
  std::uint64_t sign;             // 1 bit
  std::uint64_t biased_exponent;  // 11 bits
  std::uint64_t mantissa_field;   // 52 bits
};

constexpr Decomposed64 decompose(Binary64 x) noexcept {
  return {x.sign(), x.biased_exponent(), x.mantissa_field()};
}

constexpr Binary64 compose(const Decomposed64& d) noexcept {
  return Binary64((d.sign << 63) | ((d.biased_exponent & 0x7FFull) << 52) |
                  (d.mantissa_field & 0xFFFFFFFFFFFFFull));
}

// NaN policy used throughout: quiet bit set, payload kept (truncated on a
// narrowing conversion), sign preserved.
constexpr Binary32 quiet(Binary32 x) noexcept { return Binary32(x.bits | 0x00400000u); }
constexpr Binary64 quiet(Binary64 x) noexcept { return Binary64(x.bits | 0x0008000000000000ull); }

// An exactly known dyadic value (-1)^sign * (mant / 2^63) * 2^exponent with
// mant normalized so bit 63 is set, plus a sticky flag meaning "nonzero bits
// strictly below mant's lsb were discarded". The single rounding engine both
// the software conversions and the multiprecision oracle feed into.
struct SigParts {
  bool sign = false;
  std::int64_t exponent = 0;   // floor(log2 |value|)
  std::uint64_t mant = 0;      // bit 63 set unless the value is zero
  bool sticky = false;
};

struct Rounded32 {
  Binary32 value;
  bool inexact = false;
};

struct Rounded64 {
  Binary64 value;
  bool inexact = false;
};

Rounded32 round_sig_to_binary32(const SigParts& p, RoundingMode mode) noexcept;
Rounded64 round_sig_to_binary64(const SigParts& p, RoundingMode mode) noexcept;

// IEEE convertFormat binary64 -> binary32 under the given rounding
// attribute, in software. Handles overflow per mode, gradual underflow,
// signed zeros, and NaN quieting (payload truncated).
Binary32 convert_f64_to_f32(Binary64 v, RoundingMode mode) noexcept;

// Number of representable values strictly between a and b, plus 1 if a != b.
// Signed zeros are distinct (distance 1). NaN operands are incomparable.
std::optional<std::uint64_t> ulp32_distance(Binary32 a, Binary32 b) noexcept;
std::optional<std::uint64_t> ulp64_distance(Binary64 a, Binary64 b) noexcept;

// Monotone integer view of the value order (negatives below non-negatives,
// -0 maps just below +0) and its inverse; handy for neighbour stepping.
std::int64_t ordered32(Binary32 x) noexcept;
Binary32 from_ordered32(std::int64_t o) noexcept;

}  // namespace crvec
