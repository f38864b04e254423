#include "crvec/lanes.hpp"

#include <bit>

namespace crvec::lanes::op {

double nan_fixup(double a, double b, double c) {
  if (std::isnan(a)) return quiet64(a);
  if (std::isnan(b)) return quiet64(b);
  if (std::isnan(c)) return quiet64(c);
  return f64_qnan.to_double();  // invalid: 0*Inf, Inf - Inf
}

double scalef(double x, double y) {
  Binary64 bx = Binary64::from_double(x);
  Binary64 by = Binary64::from_double(y);
  if (bx.is_nan()) return quiet64(x);
  if (by.is_nan()) return quiet64(y);
  if (bx.is_inf()) return by == f64_neg_inf ? f64_qnan.to_double() : x;
  if (bx.is_zero()) return by == f64_pos_inf ? f64_qnan.to_double() : x;
  if (by.is_inf()) {
    if (by.sign()) return std::copysign(0.0, x);
    return std::copysign(f64_pos_inf.to_double(), x);
  }
  double yc = y < -5000.0 ? -5000.0 : (y > 5000.0 ? 5000.0 : y);
  std::int64_t n = static_cast<std::int64_t>(std::floor(yc));

  SigParts p;
  p.sign = bx.sign() != 0;
  std::uint64_t mant = bx.mantissa_field();
  std::int64_t be = static_cast<std::int64_t>(bx.biased_exponent());
  if (be == 0) {
    int msb = 63 - std::countl_zero(mant);
    p.exponent = -1074 + msb;
    p.mant = mant << (63 - msb);
  } else {
    p.exponent = be - 1023;
    p.mant = (mant | 0x10000000000000ull) << 11;
  }
  p.exponent += n;
  return round_sig_to_binary64(p, RoundingMode::NearestEven).value.to_double();
}

namespace {

// Minimal 192-bit magnitude for the exact fma fallback.
struct U192 {
  std::uint64_t w[3] = {0, 0, 0};  // w[0] least significant

  bool is_zero() const { return (w[0] | w[1] | w[2]) == 0; }

  int msb() const {  // -1 if zero
    for (int i = 2; i >= 0; --i)
      if (w[i]) return 64 * i + 63 - std::countl_zero(w[i]);
    return -1;
  }

  std::uint64_t bit(int i) const {
    if (i < 0 || i > 191) return 0;
    return (w[i >> 6] >> (i & 63)) & 1;
  }

  friend bool operator<(const U192& a, const U192& b) {
    for (int i = 2; i >= 0; --i)
      if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
    return false;
  }
  friend bool operator==(const U192& a, const U192& b) {
    return a.w[0] == b.w[0] && a.w[1] == b.w[1] && a.w[2] == b.w[2];
  }

  friend U192 operator+(const U192& a, const U192& b) {
    U192 r;
    unsigned __int128 carry = 0;
    for (int i = 0; i < 3; ++i) {
      unsigned __int128 s = static_cast<unsigned __int128>(a.w[i]) + b.w[i] + carry;
      r.w[i] = static_cast<std::uint64_t>(s);
      carry = s >> 64;
    }
    return r;
  }

  friend U192 operator-(const U192& a, const U192& b) {  // requires a >= b
    U192 r;
    std::uint64_t borrow = 0;
    for (int i = 0; i < 3; ++i) {
      std::uint64_t t = a.w[i] - b.w[i];
      r.w[i] = t - borrow;
      borrow = (a.w[i] < b.w[i]) || (t < borrow);
    }
    return r;
  }
};

U192 shl(U192 v, int n) {  // caller guarantees nothing shifts off the top
  while (n >= 64) {
    v = U192{{0, v.w[0], v.w[1]}};
    n -= 64;
  }
  if (n == 0) return v;
  U192 r;
  r.w[0] = v.w[0] << n;
  r.w[1] = (v.w[1] << n) | (v.w[0] >> (64 - n));
  r.w[2] = (v.w[2] << n) | (v.w[1] >> (64 - n));
  return r;
}

struct ShiftedDown {
  U192 v;
  bool sticky;
};

ShiftedDown shr_sticky(U192 v, std::int64_t n) {
  bool sticky = false;
  if (n >= 192) return {U192{}, !v.is_zero()};
  while (n >= 64) {
    sticky = sticky || v.w[0] != 0;
    v = U192{{v.w[1], v.w[2], 0}};
    n -= 64;
  }
  if (n > 0) {
    int s = static_cast<int>(n);
    sticky = sticky || (v.w[0] & ((1ull << s) - 1)) != 0;
    U192 r;
    r.w[0] = (v.w[0] >> s) | (v.w[1] << (64 - s));
    r.w[1] = (v.w[1] >> s) | (v.w[2] << (64 - s));
    r.w[2] = v.w[2] >> s;
    v = r;
  }
  return {v, sticky};
}

struct Unpacked {
  bool sign;
  std::int64_t lsb_exp;  // value = mant * 2^lsb_exp
  std::uint64_t mant;    // <= 53 significant bits; 0 for zero
};

Unpacked unpack_finite(double x) {
  Binary64 b = Binary64::from_double(x);
  Unpacked u{b.sign() != 0, 0, 0};
  std::int64_t be = static_cast<std::int64_t>(b.biased_exponent());
  if (be == 0) {
    u.mant = b.mantissa_field();
    u.lsb_exp = -1074;
  } else {
    u.mant = b.mantissa_field() | 0x10000000000000ull;
    u.lsb_exp = be - 1023 - 52;
  }
  return u;
}

double round_from_magnitude(bool sign, const U192& mag, std::int64_t lsb_exp,
                            bool sticky, RoundingMode mode) {
  if (mag.is_zero() && !sticky) {
    return mode == RoundingMode::TowardNegative ? -0.0 : 0.0;
  }
  SigParts p;
  p.sign = sign;
  p.sticky = sticky;
  if (mag.is_zero()) {
    // Not reachable from soft_fma: a sticky requires the operands' windows
    // to sit >= 74 bits apart, so the difference keeps a magnitude >= 2^179.
    // Encode "tiny nonzero of this sign" anyway.
    p.mant = 0;
    return round_sig_to_binary64(p, mode).value.to_double();
  }
  int msb = mag.msb();
  p.exponent = lsb_exp + msb;
  int shift = msb - 63;
  if (shift >= 0) {
    ShiftedDown sd = shr_sticky(mag, shift);
    p.mant = sd.v.w[0];
    p.sticky = p.sticky || sd.sticky;
  } else {
    p.mant = mag.w[0] << -shift;
  }
  return round_sig_to_binary64(p, mode).value.to_double();
}

}  // namespace

double soft_fma(double a, double b, double c, RoundingMode mode) {
  if (std::isnan(a) || std::isnan(b) || std::isnan(c)) return nan_fixup(a, b, c);
  if (std::isinf(a) || std::isinf(b)) {
    if (a == 0.0 || b == 0.0) return f64_qnan.to_double();
    bool ps = std::signbit(a) != std::signbit(b);
    if (std::isinf(c) && (std::signbit(c) != ps)) return f64_qnan.to_double();
    return ps ? f64_neg_inf.to_double() : f64_pos_inf.to_double();
  }
  if (std::isinf(c)) return c;

  Unpacked ua = unpack_finite(a), ub = unpack_finite(b), uc = unpack_finite(c);
  bool psign = ua.sign != ub.sign;
  unsigned __int128 pm = static_cast<unsigned __int128>(ua.mant) * ub.mant;
  std::int64_t plsb = ua.lsb_exp + ub.lsb_exp;

  if (pm == 0 && uc.mant == 0) {
    bool rs = (psign && uc.sign) ||
              (mode == RoundingMode::TowardNegative && (psign || uc.sign));
    return rs ? -0.0 : 0.0;
  }
  if (pm == 0) return c;

  int pbits = pm >> 64 ? 128 - std::countl_zero(static_cast<std::uint64_t>(pm >> 64))
                       : 64 - std::countl_zero(static_cast<std::uint64_t>(pm));
  std::int64_t pmsb_val = plsb + pbits - 1;
  std::int64_t cmsb_val = uc.mant ? uc.lsb_exp + 63 - std::countl_zero(uc.mant) : plsb - 400;

  // One shared 181-bit window anchored at the higher msb. The higher operand
  // always fits whole (<= 106 bits), so at most the lower one sheds sticky.
  std::int64_t hi_msb = pmsb_val > cmsb_val ? pmsb_val : cmsb_val;
  std::int64_t base = hi_msb - 180;

  U192 P{{static_cast<std::uint64_t>(pm), static_cast<std::uint64_t>(pm >> 64), 0}};
  bool sp = false;
  if (plsb >= base) {
    P = shl(P, static_cast<int>(plsb - base));
  } else {
    ShiftedDown sd = shr_sticky(P, base - plsb);
    P = sd.v;
    sp = sd.sticky;
  }
  U192 C{{uc.mant, 0, 0}};
  bool sc = false;
  if (uc.mant == 0) {
    C = U192{};
  } else if (uc.lsb_exp >= base) {
    C = shl(C, static_cast<int>(uc.lsb_exp - base));
  } else {
    ShiftedDown sd = shr_sticky(C, base - uc.lsb_exp);
    C = sd.v;
    sc = sd.sticky;
  }

  if (uc.mant == 0 || psign == uc.sign) {
    return round_from_magnitude(psign, P + C, base, sp || sc, mode);
  }

  // Opposite signs. Values are P + ep and C + ec in lsb units with
  // 0 <= e < 1 and at most one of ep, ec nonzero.
  bool p_bigger;
  if (P == C) {
    if (!sp && !sc) {
      return mode == RoundingMode::TowardNegative ? -0.0 : 0.0;
    }
    p_bigger = sp;
  } else {
    p_bigger = C < P;
  }
  U192 big = p_bigger ? P : C;
  U192 small = p_bigger ? C : P;
  bool big_sticky = p_bigger ? sp : sc;
  bool small_sticky = p_bigger ? sc : sp;
  bool rsign = p_bigger ? psign : uc.sign;
  U192 mag = big - small;
  bool sticky = big_sticky || small_sticky;
  if (small_sticky) {
    // subtracting an extra epsilon: borrow one lsb, remainder stays sticky
    U192 one{{1, 0, 0}};
    mag = mag - one;
  }
  return round_from_magnitude(rsign, mag, base, sticky, mode);
}

double fma_rz_slow(double a, double b, double c) {
  return soft_fma(a, b, c, RoundingMode::TowardZero);
}

double mul_rz_slow(double a, double b) {
  Unpacked ua = unpack_finite(a), ub = unpack_finite(b);
  unsigned __int128 pm = static_cast<unsigned __int128>(ua.mant) * ub.mant;
  U192 mag{{static_cast<std::uint64_t>(pm), static_cast<std::uint64_t>(pm >> 64), 0}};
  return round_from_magnitude(ua.sign != ub.sign, mag, ua.lsb_exp + ub.lsb_exp,
                              false, RoundingMode::TowardZero);
}

}  // namespace crvec::lanes::op
