#pragma once
// Lane-wise vector operation layer. Every operation is defined by a scalar,
// bit-exact contract (namespace lanes::op) and applied per lane over a fixed
// width batch. The scalar definitions are normative; any accelerated path
// must reproduce them bit for bit, NaN payloads included, which is why all
// special-value handling below is explicit rather than inherited from
// whatever the host FPU does.

#include <array>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>

#include "crvec/dd.hpp"
#include "crvec/fpbits.hpp"

namespace crvec {

template <typename T, int W>
struct Batch {
  static_assert(W == 1 || W == 4 || W == 8 || W == 16);
  std::array<T, W> lane{};

  static constexpr int width = W;
  T& operator[](int i) { return lane[static_cast<std::size_t>(i)]; }
  const T& operator[](int i) const { return lane[static_cast<std::size_t>(i)]; }

  static Batch broadcast(T v) {
    Batch b;
    b.lane.fill(v);
    return b;
  }
};

template <int W>
struct LaneMask {
  std::array<bool, W> bit{};
  bool& operator[](int i) { return bit[static_cast<std::size_t>(i)]; }
  bool operator[](int i) const { return bit[static_cast<std::size_t>(i)]; }
  bool any() const {
    for (bool b : bit)
      if (b) return true;
    return false;
  }
};

namespace lanes {

// ---- scalar contracts ------------------------------------------------------

namespace op {

inline double quiet64(double x) {
  return Binary64(Binary64::from_double(x).bits | 0x0008000000000000ull).to_double();
}

// Deterministic NaN result for an invalid or NaN-operand arithmetic op:
// first NaN operand quieted, else the canonical quiet NaN.
double nan_fixup(double a, double b, double c);

// Software fused multiply-add, all four modes; exact integer path used as
// the fallback where the fast emulation sequences lose exactness.
double soft_fma(double a, double b, double c, RoundingMode mode);

inline double fma_rn(double a, double b, double c) {
  double r = std::fma(a, b, c);
  if (std::isnan(r)) [[unlikely]]
    r = nan_fixup(a, b, c);
  return r;
}

inline double add_rn(double a, double b) {
  double r = a + b;
  if (std::isnan(r)) [[unlikely]]
    r = nan_fixup(a, b, 0.0);
  return r;
}

inline double sub_rn(double a, double b) {
  double r = a - b;
  if (std::isnan(r)) [[unlikely]]
    r = nan_fixup(a, Binary64(Binary64::from_double(b).bits ^ 0x8000000000000000ull).to_double(), 0.0);
  return r;
}

inline double mul_rn(double a, double b) {
  double r = a * b;
  if (std::isnan(r)) [[unlikely]]
    r = nan_fixup(a, b, 0.0);
  return r;
}

// Step one ulp toward zero; caller guarantees x is nonzero and finite.
inline double step_to_zero(double x) {
  return Binary64(Binary64::from_double(x).bits - 1).to_double();
}

// Round-to-zero emulation: take the round-to-nearest result and recover the
// exact rounding error with error-free transformations; when the nearest
// rounding overshot the magnitude, step one ulp toward zero. Falls back to
// the exact software path where the product EFT would under/overflow.
double fma_rz_slow(double a, double b, double c);

inline double fma_rz(double a, double b, double c) {
  double r = std::fma(a, b, c);
  if (std::isnan(r)) [[unlikely]]
    return nan_fixup(a, b, c);
  if (std::isinf(r)) [[unlikely]] {
    if (std::isinf(a) || std::isinf(b) || std::isinf(c)) return r;
    return std::copysign(0x1.fffffffffffffp+1023, r);
  }
  double p = a * b;
  double ap = std::fabs(p);
  if (ap < 0x1p-965 || ap > 0x1p+1019 || std::fabs(c) > 0x1p+1019 ||
      std::fabs(r) > 0x1p+1019) [[unlikely]]
    return fma_rz_slow(a, b, c);
  // ErrFma (Boldo-Muller): exact residual of r against a*b + c.
  double e1 = std::fma(a, b, -p);
  DD s1 = two_sum(c, e1);
  DD s2 = two_sum(p, s1.hi);
  double g = (s2.hi - r) + s2.lo;
  double rr = g + s1.lo;
  bool step = rr != 0.0 && (std::signbit(rr) == std::signbit(r)) == false;
  return step ? step_to_zero(r) : r;
}

inline double add_rz(double a, double b) {
  double s = a + b;
  if (std::isnan(s)) [[unlikely]]
    return nan_fixup(a, b, 0.0);
  if (std::isinf(s)) [[unlikely]] {
    if (std::isinf(a) || std::isinf(b)) return s;
    return std::copysign(0x1.fffffffffffffp+1023, s);
  }
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  bool step = err != 0.0 && (std::signbit(err) == std::signbit(s)) == false;
  return step ? step_to_zero(s) : s;
}

double mul_rz_slow(double a, double b);

inline double mul_rz(double a, double b) {
  double p = a * b;
  if (std::isnan(p)) [[unlikely]]
    return nan_fixup(a, b, 0.0);
  if (std::isinf(p)) [[unlikely]] {
    if (std::isinf(a) || std::isinf(b)) return p;
    return std::copysign(0x1.fffffffffffffp+1023, p);
  }
  if (std::fabs(p) < 0x1p-965) [[unlikely]] {
    if (a == 0.0 || b == 0.0) return p;
    return mul_rz_slow(a, b);
  }
  double err = std::fma(a, b, -p);
  bool step = err != 0.0 && (std::signbit(err) == std::signbit(p)) == false;
  return step ? step_to_zero(p) : p;
}

// R = x - nearest_int(x * 2^k) / 2^k, exact; |R| <= 2^-(k+1). +-Inf maps to
// +0 so that x - R still propagates the special; NaN propagates quieted.
inline double reduce_frac(double x, int k) {
  if (std::isnan(x)) [[unlikely]]
    return quiet64(x);
  double bound = std::ldexp(1.0, 51 - k);
  if (!(std::fabs(x) < bound)) return 0.0;  // big finite, +-Inf
  double magic = std::ldexp(1.5, 52 - k);
  double d = (x + magic) - magic;
  return x - d;
}

// Low bit_count mantissa bits of RN(x + magic). With magic = 0x1.8p+49 this
// is RN(x*8) mod 8.
inline std::int64_t shifter_index(double x, double magic, int bit_count) {
  if (std::isnan(x)) [[unlikely]]
    x = quiet64(x);
  double d = x + magic;
  return static_cast<std::int64_t>(Binary64::from_double(d).bits &
                                   ((1ull << bit_count) - 1));
}

// Mantissa normalized to [0.75, 1.5). getmant(+-0) = getmant(+Inf) = +1.0;
// negative inputs (but not -0) and NaN give a quiet NaN.
inline double getmant_075_15(double x) {
  Binary64 b = Binary64::from_double(x);
  if (b.is_nan()) return quiet64(x);
  if (b.is_zero() || b == f64_pos_inf) return 1.0;
  if (b.sign()) return f64_qnan.to_double();
  std::uint64_t mant = b.mantissa_field();
  if (b.biased_exponent() == 0) {  // subnormal: normalize
    int msb = 63 - std::countl_zero(mant);
    mant = (mant << (52 - msb)) & 0xFFFFFFFFFFFFFull;
  }
  std::uint64_t be = (mant >> 51) ? 1022u : 1023u;
  return Binary64((be << 52) | mant).to_double();
}

// floor(log2 |x|) as a double, subnormals fully normalized.
// getexp(+-0) = -Inf, getexp(+-Inf) = +Inf, NaN propagates quieted.
inline double getexp(double x) {
  Binary64 b = Binary64::from_double(x);
  if (b.is_nan()) return quiet64(x);
  if (b.is_zero()) return f64_neg_inf.to_double();
  std::int64_t be = static_cast<std::int64_t>(b.biased_exponent());
  if (be == 0x7FF) return f64_pos_inf.to_double();
  if (be == 0) {
    int msb = 63 - std::countl_zero(b.mantissa_field());
    return static_cast<double>(-1074 + msb);
  }
  return static_cast<double>(be - 1023);
}

// x * 2^floor(y), rounded to nearest on binary64 over/underflow, with the
// VSCALEF special-value table.
double scalef(double x, double y);

inline bool compare_neq(double a, double b) { return a != b || std::isnan(a) || std::isnan(b); }

inline std::uint64_t or_bits(std::uint64_t a, std::uint64_t b) { return a | b; }
inline std::uint64_t shift_right(std::uint64_t a, int n) { return a >> n; }

}  // namespace op

// ---- batch wrappers --------------------------------------------------------

template <int W>
using B64 = Batch<double, W>;
template <int W>
using B32 = Batch<float, W>;
template <int W>
using BI64 = Batch<std::int64_t, W>;

template <int W>
inline B64<W> fma_rn(const B64<W>& a, const B64<W>& b, const B64<W>& c) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::fma_rn(a[i], b[i], c[i]);
  return r;
}

template <int W>
inline B64<W> fma_rz(const B64<W>& a, const B64<W>& b, const B64<W>& c) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::fma_rz(a[i], b[i], c[i]);
  return r;
}

template <int W>
inline B64<W> add_rz(const B64<W>& a, const B64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::add_rz(a[i], b[i]);
  return r;
}

template <int W>
inline B64<W> mul_rz(const B64<W>& a, const B64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::mul_rz(a[i], b[i]);
  return r;
}

template <int W>
inline B64<W> add_rn(const B64<W>& a, const B64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::add_rn(a[i], b[i]);
  return r;
}

template <int W>
inline B64<W> sub_rn(const B64<W>& a, const B64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::sub_rn(a[i], b[i]);
  return r;
}

template <int W>
inline B64<W> mul_rn(const B64<W>& a, const B64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::mul_rn(a[i], b[i]);
  return r;
}

template <int W>
inline B64<W> reduce_frac(const B64<W>& x, int k) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::reduce_frac(x[i], k);
  return r;
}

template <int W>
inline BI64<W> shifter_index(const B64<W>& x, double magic, int bit_count) {
  BI64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::shifter_index(x[i], magic, bit_count);
  return r;
}

template <int W>
inline B64<W> getmant_075_15(const B64<W>& x) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::getmant_075_15(x[i]);
  return r;
}

template <int W>
inline B64<W> getexp(const B64<W>& x) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::getexp(x[i]);
  return r;
}

template <int W>
inline B64<W> scalef(const B64<W>& x, const B64<W>& y) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = op::scalef(x[i], y[i]);
  return r;
}

// table size must be 8 or 16; lane i gets table[idx_i mod size].
template <int W>
inline B64<W> permute_table(std::span<const double> table, const BI64<W>& idx) {
  assert(table.size() == 8 || table.size() == 16);
  std::uint64_t m = table.size() - 1;
  B64<W> r;
  for (int i = 0; i < W; ++i)
    r[i] = table[static_cast<std::size_t>(static_cast<std::uint64_t>(idx[i]) & m)];
  return r;
}

template <int W>
inline BI64<W> gather64(std::span<const std::int64_t> table, const BI64<W>& idx) {
  BI64<W> r;
  for (int i = 0; i < W; ++i) {
    assert(idx[i] >= 0 && static_cast<std::size_t>(idx[i]) < table.size());
    r[i] = table[static_cast<std::size_t>(idx[i])];
  }
  return r;
}

template <int W>
inline LaneMask<W> compare_neq_mask(const B64<W>& a, const B64<W>& b) {
  LaneMask<W> m;
  for (int i = 0; i < W; ++i) m[i] = op::compare_neq(a[i], b[i]);
  return m;
}

template <typename T, int W>
inline Batch<T, W> select(const LaneMask<W>& m, const Batch<T, W>& a, const Batch<T, W>& b) {
  Batch<T, W> r;
  for (int i = 0; i < W; ++i) r[i] = m[i] ? a[i] : b[i];
  return r;
}

template <int W>
inline B64<W> or_bits(const B64<W>& a, const BI64<W>& b) {
  B64<W> r;
  for (int i = 0; i < W; ++i)
    r[i] = Binary64(Binary64::from_double(a[i]).bits | static_cast<std::uint64_t>(b[i])).to_double();
  return r;
}

template <int W>
inline BI64<W> mask_to_lsb(const LaneMask<W>& m) {
  BI64<W> r;
  for (int i = 0; i < W; ++i) r[i] = m[i] ? 1 : 0;
  return r;
}

template <int W>
inline B64<W> widen(const B32<W>& x) {
  B64<W> r;
  for (int i = 0; i < W; ++i) r[i] = static_cast<double>(x[i]);
  return r;
}

}  // namespace lanes
}  // namespace crvec
