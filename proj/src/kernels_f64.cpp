#include "crvec/kernels_f64.hpp"

#include <bit>
#include <cmath>

namespace crvec {

namespace {

namespace op = lanes::op;

constexpr double exp2d_clamp = 1100.0;
constexpr double exp2d_magic = 0x1.8p+52;

inline double clamp_pipe(double xd, double bound) {
  return xd > bound ? bound : (xd < -bound ? -bound : xd);
}

// Exact SigParts of the two-double value s + e (s == RN(s + e), s normal,
// |e| <= ulp(s)/2), ready for scaled rounding. Works in a 72-bit window so
// the borrow of a subtractive e renormalizes without losing sticky state.
SigParts sig_parts_from_pair(double s, double e) {
  Binary64 bs = Binary64::from_double(s);
  SigParts p;
  p.sign = bs.sign() != 0;
  std::int64_t es = static_cast<std::int64_t>(bs.biased_exponent()) - 1023;
  std::uint64_t mant64 = (bs.mantissa_field() | 0x10000000000000ull) << 11;
  if (e == 0.0) {
    p.exponent = es;
    p.mant = mant64;
    return p;
  }
  // m holds s with 8 guard bits; w is e in guard-lsb units (exact rescale).
  unsigned __int128 m = static_cast<unsigned __int128>(mant64) << 8;
  double w = std::ldexp(e, static_cast<int>(71 - es));
  bool sub = std::signbit(w) != p.sign;
  double aw = std::fabs(w);
  std::uint64_t whole = static_cast<std::uint64_t>(aw);
  bool frac = aw != static_cast<double>(whole);
  if (!sub) {
    m += whole;
  } else {
    m -= whole;
    m -= frac ? 1 : 0;
  }
  p.sticky = frac;
  int msb = m >> 64 ? 64 + 63 - std::countl_zero(static_cast<std::uint64_t>(m >> 64))
                    : 63 - std::countl_zero(static_cast<std::uint64_t>(m));
  int drop = msb - 63;
  if (drop > 0) {
    p.sticky = p.sticky || (m & ((static_cast<unsigned __int128>(1) << drop) - 1)) != 0;
    m >>= drop;
  } else if (drop < 0) {
    m <<= -drop;
  }
  p.mant = static_cast<std::uint64_t>(m);
  p.exponent = es - 71 + msb;
  return p;
}

}  // namespace

RoundTestLane round_test_lane(DD v, std::int64_t scale_pow2, double eps_rel,
                              double eps_abs, RoundingMode mode) {
  double b = std::fma(eps_rel, std::fabs(v.hi), eps_abs);
  b = b * (1.0 + 0x1p-30) + 0x1p-1000;  // absorb interval-arithmetic rounding
  DD lo_end = fast_two_sum(v.hi, v.lo - b);
  DD hi_end = fast_two_sum(v.hi, v.lo + b);
  SigParts plo = sig_parts_from_pair(lo_end.hi, lo_end.lo);
  SigParts phi = sig_parts_from_pair(hi_end.hi, hi_end.lo);
  plo.exponent += scale_pow2;
  phi.exponent += scale_pow2;
  Rounded64 rlo = round_sig_to_binary64(plo, mode);
  Rounded64 rhi = round_sig_to_binary64(phi, mode);
  return {rlo.value, rlo.value == rhi.value};
}

double callout(FuncId f, double x, RoundingMode mode) {
  return ziv_correctly_round_f64(f, Binary64::from_double(x), mode).value.to_double();
}

DD exp2d_table_product(const Exp2dTables& t, int i1, int i2, int i3) {
  auto e1 = static_cast<std::size_t>(i1 & 15);
  auto e2 = static_cast<std::size_t>(i2 & 15);
  auto e3 = static_cast<std::size_t>(i3 & 15);
  DD a{t.T1_hi[e1], t.T1_lo[e1]};
  DD b{t.T2_hi[e2], t.T2_lo[e2]};
  DD c{t.T3_hi[e3], t.T3_lo[e3]};
  return dd_mul(dd_mul(a, b), c);
}

DD exp2d_poly(const Exp2dTables& t, double R) {
  // 2^R = 1 + R*ln2 + R^2*(c2 + c3 R + c4 R^2 + c5 R^3); exactly (1,0) at R=0.
  double q = op::fma_rn(op::fma_rn(t.c[3], R, t.c[2]), R, t.c[1]);
  q = op::fma_rn(q, R, t.c[0]);
  DD lin = two_prod(R, t.ln2.hi);
  double lo = op::fma_rn(R, t.ln2.lo, op::mul_rn(op::mul_rn(R, R), q));
  DD s = fast_two_sum(1.0, lin.hi);
  return fast_two_sum(s.hi, s.lo + (lin.lo + lo));
}

DD logd_poly(const LogdTable& t, double r) {
  // log1p(r) = r - r^2/2 + r^3*(c3 + c4 r + ...); r and r^2/2 kept exact so
  // the cancellation region next to 1 stays fully accurate.
  double q = t.c[static_cast<std::size_t>(t.tail_degree - 3)];
  for (int d = t.tail_degree - 4; d >= 0; --d)
    q = op::fma_rn(q, r, t.c[static_cast<std::size_t>(d)]);
  DD r2 = two_prod(r, r);
  double cube = op::mul_rn(op::mul_rn(r2.hi, r), q);
  DD s = fast_two_sum(r, -0.5 * r2.hi);
  return fast_two_sum(s.hi, s.lo + (cube - 0.5 * r2.lo));
}

DD logd_core(const LogdTable& t, int bin, double e, double r) {
  auto i = static_cast<std::size_t>(bin & 127);
  std::int64_t L = t.L[i];
  double lh = static_cast<double>(L);
  double ll = static_cast<double>(L - static_cast<std::int64_t>(lh));
  DD ldd{std::ldexp(lh, -62), std::ldexp(ll, -62)};
  DD p = logd_poly(t, r);
  DD el = two_prod(t.ln2.hi, e);
  DD eterm{el.hi, op::fma_rn(t.ln2.lo, e, el.lo)};
  return dd_add(dd_add(eterm, ldd), p);
}

namespace {

struct Exp2Decomp {
  std::int64_t n;
  int i1, i2, i3;
  double R;
  bool exact_pow2;
};

inline Exp2Decomp exp2d_decompose(double xc) {
  double t = op::mul_rn(xc, 4096.0);  // exact within the clamp
  double d = op::add_rn(t, exp2d_magic);
  double kd = op::sub_rn(d, exp2d_magic);  // RN(x*4096), exact
  std::uint64_t field = Binary64::from_double(d).bits & 0xFFFFFFFFFFFFFull;
  std::int64_t ki = static_cast<std::int64_t>(field) - (1ll << 51);
  double R = op::sub_rn(xc, op::mul_rn(kd, 0x1p-12));
  Exp2Decomp out;
  out.n = ki >> 12;
  out.i1 = static_cast<int>((ki >> 8) & 15);
  out.i2 = static_cast<int>((ki >> 4) & 15);
  out.i3 = static_cast<int>(ki & 15);
  out.R = R;
  out.exact_pow2 = R == 0.0 && (ki & 4095) == 0;
  return out;
}

double exp2_lane_counted(double x, RoundingMode mode, bool* undecided) {
  const AllTables& tbl = builtin_tables();
  Binary64 xb = Binary64::from_double(x);
  if (undecided) *undecided = false;
  if (xb.is_nan()) return quiet(xb).to_double();
  if (xb == f64_pos_inf) return x;
  if (xb == f64_neg_inf) return 0.0;
  double xc = clamp_pipe(x, exp2d_clamp);
  Exp2Decomp dec = exp2d_decompose(xc);
  if (dec.exact_pow2) {
    SigParts p;
    p.exponent = dec.n;
    p.mant = 1ull << 63;
    return round_sig_to_binary64(p, mode).value.to_double();
  }
  DD T = exp2d_table_product(tbl.exp2d, dec.i1, dec.i2, dec.i3);
  DD P = exp2d_poly(tbl.exp2d, dec.R);
  DD V = dd_mul(T, P);
  RoundTestLane rt = round_test_lane(V, dec.n, tbl.eps.eps_exp2d, 0.0, mode);
  if (rt.decided) return rt.value.to_double();
  if (undecided) *undecided = true;
  return callout(FuncId::exp2, x, mode);
}

double log_lane_counted(double x, RoundingMode mode, bool* undecided) {
  const AllTables& tbl = builtin_tables();
  Binary64 xb = Binary64::from_double(x);
  if (undecided) *undecided = false;
  if (xb.is_nan()) return quiet(xb).to_double();
  if (xb.is_zero()) return f64_neg_inf.to_double();
  if (xb.sign()) return f64_qnan.to_double();
  if (xb == f64_pos_inf) return x;
  if (x == 1.0) return 0.0;
  double mx = op::getmant_075_15(x);
  double e = op::sub_rn(op::getexp(x), op::getexp(mx));
  int bin = static_cast<int>((Binary64::from_double(mx).bits >> 45) & 127);
  double rcp = logd_rcp_from_index(bin);
  double r = op::fma_rn(rcp, mx, -1.0);
  DD V = logd_core(tbl.logd, bin, e, r);
  double quant = tbl.logd.L[static_cast<std::size_t>(bin)] != 0 ? tbl.eps.quant_logd : 0.0;
  RoundTestLane rt = round_test_lane(V, 0, tbl.eps.eps_logd, quant, mode);
  if (rt.decided) return rt.value.to_double();
  if (undecided) *undecided = true;
  return callout(FuncId::log, x, mode);
}

}  // namespace

double cr_exp2_scalar(double x, RoundingMode mode) {
  return exp2_lane_counted(x, mode, nullptr);
}

double cr_log_scalar(double x, RoundingMode mode) {
  return log_lane_counted(x, mode, nullptr);
}

template <int W>
Batch<double, W> cr_exp2_counted(const Batch<double, W>& x, RoundingMode mode,
                                 FastPathStats& stats) {
  Batch<double, W> y;
  for (int i = 0; i < W; ++i) {
    bool u = false;
    y[i] = exp2_lane_counted(x[i], mode, &u);
    stats.lanes++;
    stats.undecided += u;
  }
  return y;
}

template <int W>
Batch<double, W> cr_log_counted(const Batch<double, W>& x, RoundingMode mode,
                                FastPathStats& stats) {
  Batch<double, W> y;
  for (int i = 0; i < W; ++i) {
    bool u = false;
    y[i] = log_lane_counted(x[i], mode, &u);
    stats.lanes++;
    stats.undecided += u;
  }
  return y;
}

template <int W>
Batch<double, W> cr_exp2(const Batch<double, W>& x, RoundingMode mode, Backend backend) {
  const AllTables& tbl = builtin_tables();
  if (backend == Backend::reference) {
    Batch<double, W> y;
    for (int i = 0; i < W; ++i) y[i] = exp2_lane_counted(x[i], mode, nullptr);
    return y;
  }
  // Vector path: the whole fast path runs on every lane; specials, exact
  // powers and undecided lanes resolve per lane afterwards.
  LaneMask<W> m_nan, m_pinf, m_ninf;
  Batch<double, W> xc;
  for (int i = 0; i < W; ++i) {
    Binary64 b = Binary64::from_double(x[i]);
    m_nan[i] = b.is_nan();
    m_pinf[i] = b == f64_pos_inf;
    m_ninf[i] = b == f64_neg_inf;
    xc[i] = clamp_pipe(x[i], exp2d_clamp);
  }
  Batch<double, W> y;
  for (int i = 0; i < W; ++i) {
    Exp2Decomp dec = exp2d_decompose(xc[i]);
    if (dec.exact_pow2) {
      SigParts p;
      p.exponent = dec.n;
      p.mant = 1ull << 63;
      y[i] = round_sig_to_binary64(p, mode).value.to_double();
      continue;
    }
    DD T = exp2d_table_product(tbl.exp2d, dec.i1, dec.i2, dec.i3);
    DD P = exp2d_poly(tbl.exp2d, dec.R);
    DD V = dd_mul(T, P);
    RoundTestLane rt = round_test_lane(V, dec.n, tbl.eps.eps_exp2d, 0.0, mode);
    y[i] = rt.decided ? rt.value.to_double() : callout(FuncId::exp2, x[i], mode);
  }
  Batch<double, W> y_nan;
  for (int i = 0; i < W; ++i) y_nan[i] = quiet(Binary64::from_double(x[i])).to_double();
  y = lanes::select(m_nan, y_nan, y);
  y = lanes::select(m_pinf, Batch<double, W>::broadcast(f64_pos_inf.to_double()), y);
  y = lanes::select(m_ninf, Batch<double, W>::broadcast(0.0), y);
  return y;
}

template <int W>
Batch<double, W> cr_log(const Batch<double, W>& x, RoundingMode mode, Backend backend) {
  if (backend == Backend::reference) {
    Batch<double, W> y;
    for (int i = 0; i < W; ++i) y[i] = log_lane_counted(x[i], mode, nullptr);
    return y;
  }
  const AllTables& tbl = builtin_tables();
  Batch<double, W> y;
  LaneMask<W> m_special;
  for (int i = 0; i < W; ++i) {
    Binary64 b = Binary64::from_double(x[i]);
    m_special[i] = b.is_nan() || b.is_zero() || b.sign() != 0 || b.is_inf() || x[i] == 1.0;
  }
  lanes::B64<W> mx = lanes::getmant_075_15(x);
  lanes::B64<W> e = lanes::sub_rn(lanes::getexp(x), lanes::getexp(mx));
  for (int i = 0; i < W; ++i) {
    if (m_special[i]) {
      y[i] = log_lane_counted(x[i], mode, nullptr);  // special table
      continue;
    }
    int bin = static_cast<int>((Binary64::from_double(mx[i]).bits >> 45) & 127);
    double rcp = logd_rcp_from_index(bin);
    double r = op::fma_rn(rcp, mx[i], -1.0);
    DD V = logd_core(tbl.logd, bin, e[i], r);
    double quant = tbl.logd.L[static_cast<std::size_t>(bin)] != 0 ? tbl.eps.quant_logd : 0.0;
    RoundTestLane rt = round_test_lane(V, 0, tbl.eps.eps_logd, quant, mode);
    y[i] = rt.decided ? rt.value.to_double() : callout(FuncId::log, x[i], mode);
  }
  return y;
}

template Batch<double, 1> cr_exp2<1>(const Batch<double, 1>&, RoundingMode, Backend);
template Batch<double, 4> cr_exp2<4>(const Batch<double, 4>&, RoundingMode, Backend);
template Batch<double, 8> cr_exp2<8>(const Batch<double, 8>&, RoundingMode, Backend);
template Batch<double, 16> cr_exp2<16>(const Batch<double, 16>&, RoundingMode, Backend);
template Batch<double, 1> cr_log<1>(const Batch<double, 1>&, RoundingMode, Backend);
template Batch<double, 4> cr_log<4>(const Batch<double, 4>&, RoundingMode, Backend);
template Batch<double, 8> cr_log<8>(const Batch<double, 8>&, RoundingMode, Backend);
template Batch<double, 16> cr_log<16>(const Batch<double, 16>&, RoundingMode, Backend);

template Batch<double, 1> cr_exp2_counted<1>(const Batch<double, 1>&, RoundingMode, FastPathStats&);
template Batch<double, 4> cr_exp2_counted<4>(const Batch<double, 4>&, RoundingMode, FastPathStats&);
template Batch<double, 8> cr_exp2_counted<8>(const Batch<double, 8>&, RoundingMode, FastPathStats&);
template Batch<double, 16> cr_exp2_counted<16>(const Batch<double, 16>&, RoundingMode, FastPathStats&);
template Batch<double, 1> cr_log_counted<1>(const Batch<double, 1>&, RoundingMode, FastPathStats&);
template Batch<double, 4> cr_log_counted<4>(const Batch<double, 4>&, RoundingMode, FastPathStats&);
template Batch<double, 8> cr_log_counted<8>(const Batch<double, 8>&, RoundingMode, FastPathStats&);
template Batch<double, 16> cr_log_counted<16>(const Batch<double, 16>&, RoundingMode, FastPathStats&);

}  // namespace crvec
