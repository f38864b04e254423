#include "crvec/fpbits.hpp"

#include <bit>

namespace crvec {

const char* rounding_mode_name(RoundingMode m) noexcept {
  switch (m) {
    case RoundingMode::NearestEven: return "rne";
    case RoundingMode::TowardZero: return "rz";
    case RoundingMode::TowardPositive: return "ru";
    case RoundingMode::TowardNegative: return "rd";
  }
  return "?";
}

namespace {

// Shared rounding core. P = target precision (24 or 53), emin = smallest
// normal exponent, emax = largest finite exponent. Returns the target's
// biased encoding pieces through the format-specific wrappers below.
struct RoundedRaw {
  bool sign;
  std::int64_t exponent;   // of the msb, after any carry; exponent < emin
                           // means the mantissa is subnormal-encoded
  std::uint64_t mantissa;  // P-bit significand including the leading bit,
                           // or a subnormal significand when exponent < emin
  bool inexact;
  bool overflow;
  bool is_zero;
};

RoundedRaw round_sig(const SigParts& p, RoundingMode mode, int prec,
                     std::int64_t emin, std::int64_t emax) noexcept {
  RoundedRaw out{p.sign, 0, 0, false, false, false};
  if (p.mant == 0) {
    out.is_zero = true;
    out.inexact = p.sticky;
    if (p.sticky) {
      // A nonzero value below every representable magnitude: direction
      // decides between zero and the minimum subnormal.
      bool up = (mode == RoundingMode::TowardPositive && !p.sign) ||
                (mode == RoundingMode::TowardNegative && p.sign);
      if (up) {
        out.is_zero = false;
        out.exponent = emin - (prec - 1);  // min subnormal, encoded below
        out.mantissa = 1;
      }
    }
    return out;
  }

  std::int64_t e = p.exponent;
  // Bits of the 64-bit significand we must drop to land on the target
  // precision; more when the result is subnormal. Anything past 65 behaves
  // like 65 (the whole significand strictly below the half position).
  std::int64_t drop64 = 64 - prec;
  if (e < emin) drop64 += emin - e;
  int drop = drop64 > 65 ? 65 : static_cast<int>(drop64);

  std::uint64_t kept, rem_high_bit, rem_rest;
  bool sticky = p.sticky;
  if (drop >= 65) {
    kept = 0;
    rem_high_bit = 0;
    rem_rest = 1;
  } else if (drop == 64) {
    kept = 0;
    rem_high_bit = p.mant >> 63;
    rem_rest = (p.mant << 1) != 0;
  } else {
    kept = p.mant >> drop;
    std::uint64_t rem = drop ? (p.mant << (64 - drop)) : 0;
    rem_high_bit = drop ? (rem >> 63) : 0;
    rem_rest = drop ? ((rem << 1) != 0) : 0;
  }
  bool inexact = rem_high_bit || rem_rest || sticky;

  bool round_up = false;
  switch (mode) {
    case RoundingMode::NearestEven:
      round_up = rem_high_bit && (rem_rest || sticky || (kept & 1));
      break;
    case RoundingMode::TowardZero:
      round_up = false;
      break;
    case RoundingMode::TowardPositive:
      round_up = !p.sign && inexact;
      break;
    case RoundingMode::TowardNegative:
      round_up = p.sign && inexact;
      break;
  }
  if (round_up) {
    kept += 1;
    if (kept >> prec) {  // carry out of the significand
      kept >>= 1;
      e += 1;
    }
  }
  // `kept` is aligned to the target lattice already; a subnormal that
  // carried up to 2^(prec-1) is exactly the smallest normal.
  if (e < emin && (kept >> (prec - 1))) e = emin;
  if (kept == 0) {
    out.is_zero = true;
    out.inexact = inexact;
    return out;
  }
  if (e > emax) {
    out.overflow = true;
    out.inexact = true;
    return out;
  }
  out.exponent = e;
  out.mantissa = kept;
  out.inexact = inexact;
  return out;
}

}  // namespace

Rounded32 round_sig_to_binary32(const SigParts& p, RoundingMode mode) noexcept {
  RoundedRaw r = round_sig(p, mode, 24, -126, 127);
  std::uint32_t s = r.sign ? 0x80000000u : 0u;
  if (r.is_zero) return {Binary32(s), r.inexact};
  if (r.overflow) {
    bool to_inf = mode == RoundingMode::NearestEven ||
                  (mode == RoundingMode::TowardPositive && !r.sign) ||
                  (mode == RoundingMode::TowardNegative && r.sign);
    return {Binary32(s | (to_inf ? f32_pos_inf.bits : f32_max_finite.bits)), true};
  }
  std::uint32_t mant = static_cast<std::uint32_t>(r.mantissa);
  std::uint32_t be;
  if (mant >> 23) {  // normal
    be = static_cast<std::uint32_t>(r.exponent + 127);
    mant &= 0x7FFFFFu;
  } else {  // subnormal
    be = 0;
  }
  return {Binary32(s | (be << 23) | mant), r.inexact};
}

Rounded64 round_sig_to_binary64(const SigParts& p, RoundingMode mode) noexcept {
  RoundedRaw r = round_sig(p, mode, 53, -1022, 1023);
  std::uint64_t s = r.sign ? 0x8000000000000000ull : 0ull;
  if (r.is_zero) return {Binary64(s), r.inexact};
  if (r.overflow) {
    bool to_inf = mode == RoundingMode::NearestEven ||
                  (mode == RoundingMode::TowardPositive && !r.sign) ||
                  (mode == RoundingMode::TowardNegative && r.sign);
    return {Binary64(s | (to_inf ? f64_pos_inf.bits : f64_max_finite.bits)), true};
  }
  std::uint64_t mant = r.mantissa;
  std::uint64_t be;
  if (mant >> 52) {
    be = static_cast<std::uint64_t>(r.exponent + 1023);
    mant &= 0xFFFFFFFFFFFFFull;
  } else {
    be = 0;
  }
  return {Binary64(s | (be << 52) | mant), r.inexact};
}

Binary32 convert_f64_to_f32(Binary64 v, RoundingMode mode) noexcept {
  std::uint32_t s32 = static_cast<std::uint32_t>(v.sign()) << 31;
  if (v.is_nan()) {
    std::uint32_t payload = static_cast<std::uint32_t>(v.mantissa_field() >> 29) & 0x3FFFFFu;
    return Binary32(s32 | 0x7F800000u | 0x00400000u | payload);
  }
  if (v.is_inf()) return Binary32(s32 | f32_pos_inf.bits);
  if (v.is_zero()) return Binary32(s32);

  SigParts p;
  p.sign = v.sign() != 0;
  std::uint64_t mant = v.mantissa_field();
  std::int64_t be = static_cast<std::int64_t>(v.biased_exponent());
  if (be == 0) {  // subnormal: value = mant * 2^-1074
    int msb = 63 - std::countl_zero(mant);
    p.exponent = -1074 + msb;
    p.mant = mant << (63 - msb);
  } else {
    p.exponent = be - 1023;
    p.mant = (mant | 0x10000000000000ull) << 11;
  }
  p.sticky = false;
  return round_sig_to_binary32(p, mode).value;
}

// Monotone integer mapping: negatives (including -0) sit strictly below
// non-negatives, so distance(-0, +0) = 1.
std::int64_t ordered32(Binary32 x) noexcept {
  std::int64_t mag = x.bits & 0x7FFFFFFFu;
  return x.sign() ? -mag - 1 : mag;
}

Binary32 from_ordered32(std::int64_t o) noexcept {
  if (o >= 0) return Binary32(static_cast<std::uint32_t>(o));
  return Binary32(0x80000000u | static_cast<std::uint32_t>(-(o + 1)));
}

namespace {

__int128 ordered64(Binary64 x) noexcept {
  __int128 mag = static_cast<__int128>(x.bits & 0x7FFFFFFFFFFFFFFFull);
  return x.sign() ? -mag - 1 : mag;
}

}  // namespace

std::optional<std::uint64_t> ulp32_distance(Binary32 a, Binary32 b) noexcept {
  if (a.is_nan() || b.is_nan()) return std::nullopt;
  std::int64_t d = ordered32(a) - ordered32(b);
  return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

std::optional<std::uint64_t> ulp64_distance(Binary64 a, Binary64 b) noexcept {
  if (a.is_nan() || b.is_nan()) return std::nullopt;
  __int128 d = ordered64(a) - ordered64(b);
  if (d < 0) d = -d;
  return static_cast<std::uint64_t>(d);
}

}  // namespace crvec
