#include "crvec/kernels_f32.hpp"

#include <cmath>

namespace crvec {

namespace {

namespace op = lanes::op;

// Inputs beyond this magnitude already saturate the binary32 result; the
// clamp keeps every later step in normal binary64 range while the sticky
// bit keeps directed modes honest about inexactness.
constexpr double exp2f_clamp = 260.0;

constexpr double shifter_magic = 0x1.8p+49;

inline double clamp_pipe(double xd, double bound) {
  // NaN passes through (both compares false).
  return xd > bound ? bound : (xd < -bound ? -bound : xd);
}

inline Binary32 quiet32_of(float x) { return quiet(Binary32::from_float(x)); }

double exp2f_poly_impl(const Exp2fTables& t, double R) {
  double p = t.c[6];
  p = op::fma_rn(p, R, t.c[5]);
  p = op::fma_rn(p, R, t.c[4]);
  p = op::fma_rn(p, R, t.c[3]);
  p = op::fma_rn(p, R, t.c[2]);
  p = op::fma_rn(p, R, t.c[1]);
  p = op::fma_rn(p, R, t.c[0]);
  return p;
}

float exp2f_lane(float x, RoundingMode mode) {
  const Exp2fTables& t = builtin_tables().exp2f;
  Binary32 xb = Binary32::from_float(x);
  double xd = static_cast<double>(x);
  double xc = clamp_pipe(xd, exp2f_clamp);
  double R = op::reduce_frac(xc, 3);
  std::int64_t idx = op::shifter_index(xc, shifter_magic, 3);
  double Nd = op::sub_rn(xc, R);
  double T = t.T[static_cast<std::size_t>(idx & 7)];
  double poly = exp2f_poly_impl(t, R);
  double pT = op::mul_rn(poly, T);
  double r0 = op::fma_rz(pT, R, T);
  std::uint64_t sticky = op::compare_neq(R, 0.0) ? 1u : 0u;
  double r1 = Binary64(Binary64::from_double(r0).bits | sticky).to_double();
  double r2 = op::scalef(r1, Nd);
  Binary32 y = convert_f64_to_f32(Binary64::from_double(r2), mode);
  if (xb.is_nan()) y = quiet32_of(x);
  else if (xb == f32_pos_inf) y = f32_pos_inf;
  else if (xb == f32_neg_inf) y = f32_pos_zero;
  return y.to_float();
}

float log2f_lane(float x, RoundingMode mode) {
  const Log2fTables& t = builtin_tables().log2f;
  Binary32 xb = Binary32::from_float(x);
  double xd = static_cast<double>(x);
  Binary64 xw = Binary64::from_double(xd);
  double mx = op::getmant_075_15(xd);
  double ex = op::sub_rn(op::getexp(xd), op::getexp(mx));
  std::size_t idx = static_cast<std::size_t>((xw.bits >> 49) & 7);
  double R = op::fma_rn(mx, 1.5, -1.5);
  double poly = t.c[9][idx];
  for (int d = 8; d >= 0; --d)
    poly = op::fma_rn(poly, R, t.c[static_cast<std::size_t>(d)][idx]);
  double ex_rz = op::add_rz(ex, R);
  double r0 = op::fma_rz(poly, R, ex_rz);
  Binary32 y = convert_f64_to_f32(Binary64::from_double(r0), mode);
  if (xb.is_zero()) y = f32_neg_inf;
  else if (xb == f32_pos_inf) y = f32_pos_inf;
  else if (xb.sign() && !xb.is_nan()) y = f32_qnan;
  if (xb.is_nan()) y = quiet32_of(x);
  return y.to_float();
}

template <int W>
Batch<float, W> exp2f_vector(const Batch<float, W>& x, RoundingMode mode) {
  const Exp2fTables& t = builtin_tables().exp2f;
  lanes::B64<W> xd = lanes::widen(x);
  LaneMask<W> m_nan, m_pinf, m_ninf;
  for (int i = 0; i < W; ++i) {
    Binary32 b = Binary32::from_float(x[i]);
    m_nan[i] = b.is_nan();
    m_pinf[i] = b == f32_pos_inf;
    m_ninf[i] = b == f32_neg_inf;
  }
  lanes::B64<W> xc;
  for (int i = 0; i < W; ++i) xc[i] = clamp_pipe(xd[i], exp2f_clamp);

  lanes::B64<W> R = lanes::reduce_frac(xc, 3);
  lanes::BI64<W> idx = lanes::shifter_index(xc, shifter_magic, 3);
  lanes::B64<W> Nd = lanes::sub_rn(xc, R);
  lanes::B64<W> T = lanes::permute_table<W>(std::span<const double>(t.T), idx);

  lanes::B64<W> poly = lanes::B64<W>::broadcast(t.c[6]);
  for (int d = 5; d >= 0; --d)
    poly = lanes::fma_rn(poly, R, lanes::B64<W>::broadcast(t.c[static_cast<std::size_t>(d)]));
  lanes::B64<W> pT = lanes::mul_rn(poly, T);
  lanes::B64<W> r0 = lanes::fma_rz(pT, R, T);
  LaneMask<W> sticky = lanes::compare_neq_mask(R, lanes::B64<W>::broadcast(0.0));
  lanes::B64<W> r1 = lanes::or_bits(r0, lanes::mask_to_lsb(sticky));
  lanes::B64<W> r2 = lanes::scalef(r1, Nd);

  Batch<float, W> y;
  for (int i = 0; i < W; ++i)
    y[i] = convert_f64_to_f32(Binary64::from_double(r2[i]), mode).to_float();
  Batch<float, W> y_nan;
  for (int i = 0; i < W; ++i) y_nan[i] = quiet32_of(x[i]).to_float();
  y = lanes::select(m_nan, y_nan, y);
  y = lanes::select(m_pinf, Batch<float, W>::broadcast(f32_pos_inf.to_float()), y);
  y = lanes::select(m_ninf, Batch<float, W>::broadcast(0.0f), y);
  return y;
}

template <int W>
Batch<float, W> log2f_vector(const Batch<float, W>& x, RoundingMode mode) {
  const Log2fTables& t = builtin_tables().log2f;
  lanes::B64<W> xd = lanes::widen(x);
  LaneMask<W> m_nan, m_pinf, m_zero, m_neg;
  for (int i = 0; i < W; ++i) {
    Binary32 b = Binary32::from_float(x[i]);
    m_nan[i] = b.is_nan();
    m_pinf[i] = b == f32_pos_inf;
    m_zero[i] = b.is_zero();
    m_neg[i] = b.sign() != 0 && !b.is_zero() && !b.is_nan();
  }
  lanes::B64<W> mx = lanes::getmant_075_15(xd);
  lanes::B64<W> ex = lanes::sub_rn(lanes::getexp(xd), lanes::getexp(mx));
  lanes::BI64<W> idx;
  for (int i = 0; i < W; ++i)
    idx[i] = static_cast<std::int64_t>((Binary64::from_double(xd[i]).bits >> 49) & 7);
  lanes::B64<W> R = lanes::fma_rn(mx, lanes::B64<W>::broadcast(1.5),
                                  lanes::B64<W>::broadcast(-1.5));
  lanes::B64<W> poly = lanes::permute_table<W>(std::span<const double>(t.c[9]), idx);
  for (int d = 8; d >= 0; --d) {
    lanes::B64<W> cd =
        lanes::permute_table<W>(std::span<const double>(t.c[static_cast<std::size_t>(d)]), idx);
    poly = lanes::fma_rn(poly, R, cd);
  }
  lanes::B64<W> ex_rz = lanes::add_rz(ex, R);
  lanes::B64<W> r0 = lanes::fma_rz(poly, R, ex_rz);

  Batch<float, W> y;
  for (int i = 0; i < W; ++i)
    y[i] = convert_f64_to_f32(Binary64::from_double(r0[i]), mode).to_float();
  Batch<float, W> y_nan;
  for (int i = 0; i < W; ++i) y_nan[i] = quiet32_of(x[i]).to_float();
  y = lanes::select(m_zero, Batch<float, W>::broadcast(f32_neg_inf.to_float()), y);
  y = lanes::select(m_pinf, Batch<float, W>::broadcast(f32_pos_inf.to_float()), y);
  y = lanes::select(m_neg, Batch<float, W>::broadcast(f32_qnan.to_float()), y);
  y = lanes::select(m_nan, y_nan, y);
  return y;
}

}  // namespace

double exp2f_poly(const Exp2fTables& t, double R) { return exp2f_poly_impl(t, R); }

double log2f_poly(const Log2fTables& t, int interval, double R) {
  std::size_t j = static_cast<std::size_t>(interval & 7);
  double poly = t.c[9][j];
  for (int d = 8; d >= 0; --d) poly = op::fma_rn(poly, R, t.c[static_cast<std::size_t>(d)][j]);
  return poly;
}

float cr_exp2f_scalar(float x, RoundingMode mode) { return exp2f_lane(x, mode); }
float cr_log2f_scalar(float x, RoundingMode mode) { return log2f_lane(x, mode); }

template <int W>
Batch<float, W> cr_exp2f(const Batch<float, W>& x, RoundingMode mode, Backend backend) {
  if (backend == Backend::reference) {
    Batch<float, W> y;
    for (int i = 0; i < W; ++i) y[i] = exp2f_lane(x[i], mode);
    return y;
  }
  return exp2f_vector<W>(x, mode);
}

template <int W>
Batch<float, W> cr_log2f(const Batch<float, W>& x, RoundingMode mode, Backend backend) {
  if (backend == Backend::reference) {
    Batch<float, W> y;
    for (int i = 0; i < W; ++i) y[i] = log2f_lane(x[i], mode);
    return y;
  }
  return log2f_vector<W>(x, mode);
}

template Batch<float, 1> cr_exp2f<1>(const Batch<float, 1>&, RoundingMode, Backend);
template Batch<float, 4> cr_exp2f<4>(const Batch<float, 4>&, RoundingMode, Backend);
template Batch<float, 8> cr_exp2f<8>(const Batch<float, 8>&, RoundingMode, Backend);
template Batch<float, 16> cr_exp2f<16>(const Batch<float, 16>&, RoundingMode, Backend);
template Batch<float, 1> cr_log2f<1>(const Batch<float, 1>&, RoundingMode, Backend);
template Batch<float, 4> cr_log2f<4>(const Batch<float, 4>&, RoundingMode, Backend);
template Batch<float, 8> cr_log2f<8>(const Batch<float, 8>&, RoundingMode, Backend);
template Batch<float, 16> cr_log2f<16>(const Batch<float, 16>&, RoundingMode, Backend);

}  // namespace crvec
