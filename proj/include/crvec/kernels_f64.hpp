#pragma once
// Correctly rounded binary64 exp2 and natural log: a lane-parallel double-
// double fast path, a per-lane rounding test, and a scalar multiprecision
// callout for the lanes the test cannot decide.
//
// exp2 decomposes x = N + (i1*256 + i2*16 + i3)/4096 + R with |R| <= 2^-13
// and rebuilds 2^x as T1[i1]*T2[i2]*T3[i3]*2^R in double-double, deferring
// the 2^N scaling into the rounding test so subnormal results round on the
// right lattice. log normalizes the mantissa to [0.75, 1.5), derives a
// 7-bit reciprocal from the table index, and sums e*ln2 + (-log rcp) +
// log1p(rcp*mx - 1); the table term is a 2^-62-scaled integer, and its
// quantization enters the rounding test as a per-lane absolute slack.

#include "crvec/fpbits.hpp"
#include "crvec/kernels_f32.hpp"
#include "crvec/lanes.hpp"
#include "crvec/oracle.hpp"
#include "crvec/tables.hpp"

namespace crvec {

template <int W>
struct DDBatch {
  Batch<double, W> hi, lo;
};

template <int W>
struct RoundTestOutcome {
  Batch<double, W> fast_result;
  LaneMask<W> decided;
  double error_bound = 0.0;
};

// One lane of the Ziv-style straddle test: round (hi + lo -/+ bound) * 2^n
// to binary64 under `mode`; the lane is decided when both ends agree.
// bound = eps_rel * |hi| + eps_abs, inflated for its own rounding.
struct RoundTestLane {
  Binary64 value;
  bool decided;
};
RoundTestLane round_test_lane(DD v, std::int64_t scale_pow2, double eps_rel,
                              double eps_abs, RoundingMode mode);

// Unscaled batch form; eps must dominate the caller's certified fast-path
// error bound.
template <int W>
RoundTestOutcome<W> round_test(const DDBatch<W>& v, double eps, RoundingMode mode) {
  RoundTestOutcome<W> out;
  out.error_bound = eps;
  for (int i = 0; i < W; ++i) {
    RoundTestLane r = round_test_lane(DD{v.hi[i], v.lo[i]}, 0, eps, 0.0, mode);
    out.fast_result[i] = r.value.to_double();
    out.decided[i] = r.decided;
  }
  return out;
}

// Guaranteed-correct scalar fallback (multiprecision Ziv rounder).
double callout(FuncId f, double x, RoundingMode mode);

template <int W>
Batch<double, W> cr_exp2(const Batch<double, W>& x, RoundingMode mode,
                         Backend backend = Backend::vector);
template <int W>
Batch<double, W> cr_log(const Batch<double, W>& x, RoundingMode mode,
                        Backend backend = Backend::vector);

double cr_exp2_scalar(double x, RoundingMode mode);
double cr_log_scalar(double x, RoundingMode mode);

// Fast-path statistics for one batch evaluation (callout accounting).
struct FastPathStats {
  std::uint64_t lanes = 0;
  std::uint64_t undecided = 0;
};
template <int W>
Batch<double, W> cr_exp2_counted(const Batch<double, W>& x, RoundingMode mode,
                                 FastPathStats& stats);
template <int W>
Batch<double, W> cr_log_counted(const Batch<double, W>& x, RoundingMode mode,
                                FastPathStats& stats);

// Pipeline pieces shared with the table certifier.
DD exp2d_table_product(const Exp2dTables& t, int i1, int i2, int i3);
DD exp2d_poly(const Exp2dTables& t, double R);
DD logd_poly(const LogdTable& t, double r);
DD logd_core(const LogdTable& t, int bin, double e, double r);

extern template Batch<double, 1> cr_exp2<1>(const Batch<double, 1>&, RoundingMode, Backend);
extern template Batch<double, 4> cr_exp2<4>(const Batch<double, 4>&, RoundingMode, Backend);
extern template Batch<double, 8> cr_exp2<8>(const Batch<double, 8>&, RoundingMode, Backend);
extern template Batch<double, 16> cr_exp2<16>(const Batch<double, 16>&, RoundingMode, Backend);
extern template Batch<double, 1> cr_log<1>(const Batch<double, 1>&, RoundingMode, Backend);
extern template Batch<double, 4> cr_log<4>(const Batch<double, 4>&, RoundingMode, Backend);
extern template Batch<double, 8> cr_log<8>(const Batch<double, 8>&, RoundingMode, Backend);
extern template Batch<double, 16> cr_log<16>(const Batch<double, 16>&, RoundingMode, Backend);

}  // namespace crvec
