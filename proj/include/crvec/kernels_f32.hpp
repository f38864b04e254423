#pragma once
// Branch-free correctly rounded binary32 exp2f and log2f over lane batches,
// all four rounding modes.
//
// Both kernels widen to binary64 and run one straight-line pipeline for
// every lane; special values are resolved by a final select, never by a
// data-dependent branch. exp2f reduces against multiples of 1/8, looks up
// 2^(j/8) in an 8-entry table, evaluates (2^R - 1)/R and rebuilds the
// mantissa with a truncate-plus-sticky step so one final conversion rounds
// correctly in any mode. log2f normalizes the mantissa to [0.75, 1.5),
// picks one of 8 degree-9 polynomials by the top mantissa bits, and needs
// no sticky correction.
//
// Backend::reference is the normative lane-at-a-time scalar loop;
// Backend::vector is the width-W operation chain the batch entry points use
// by default. They are bit-identical by construction and the consistency
// harness checks it.

#include "crvec/fpbits.hpp"
#include "crvec/lanes.hpp"
#include "crvec/tables.hpp"

namespace crvec {

enum class Backend { reference, vector };

template <int W>
Batch<float, W> cr_exp2f(const Batch<float, W>& x, RoundingMode mode,
                         Backend backend = Backend::vector);
template <int W>
Batch<float, W> cr_log2f(const Batch<float, W>& x, RoundingMode mode,
                         Backend backend = Backend::vector);

float cr_exp2f_scalar(float x, RoundingMode mode);
float cr_log2f_scalar(float x, RoundingMode mode);

// Pipeline pieces shared with the table certifier: the rounded Horner
// result for (2^R - 1)/R, and the per-interval log2 polynomial.
double exp2f_poly(const Exp2fTables& t, double R);
double log2f_poly(const Log2fTables& t, int interval, double R);

extern template Batch<float, 1> cr_exp2f<1>(const Batch<float, 1>&, RoundingMode, Backend);
extern template Batch<float, 4> cr_exp2f<4>(const Batch<float, 4>&, RoundingMode, Backend);
extern template Batch<float, 8> cr_exp2f<8>(const Batch<float, 8>&, RoundingMode, Backend);
extern template Batch<float, 16> cr_exp2f<16>(const Batch<float, 16>&, RoundingMode, Backend);
extern template Batch<float, 1> cr_log2f<1>(const Batch<float, 1>&, RoundingMode, Backend);
extern template Batch<float, 4> cr_log2f<4>(const Batch<float, 4>&, RoundingMode, Backend);
extern template Batch<float, 8> cr_log2f<8>(const Batch<float, 8>&, RoundingMode, Backend);
extern template Batch<float, 16> cr_log2f<16>(const Batch<float, 16>&, RoundingMode, Backend);

}  // namespace crvec
