#pragma once
// Double-double arithmetic on top of error-free transformations.
// Algorithms from Dekker (1971), Knuth/Moller two-sum, and the fma-based
// variants surveyed in Joldes, Muller, Popescu, ACM TOMS 44 (2018).

#include <cmath>

namespace crvec {

// hi + lo with hi == RN(hi + lo), |lo| <= ulp(hi)/2.
struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

// s + e == a + b exactly, for any finite a, b (Moller-Knuth, 6 flops).
inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

// Requires |a| >= |b| (or a == 0). 3 flops.
inline DD fast_two_sum(double a, double b) {
  double s = a + b;
  double e = b - (s - a);
  return {s, e};
}

// p + e == a * b exactly when no over/underflow of either part.
inline DD two_prod(double a, double b) {
  double p = a * b;
  double e = std::fma(a, b, -p);
  return {p, e};
}

// Accurate double-double sum (AccurateDWPlusDW); relative error <= 3*2^-106
// even under full cancellation.
inline DD dd_add(DD x, DD y) {
  DD s = two_sum(x.hi, y.hi);
  DD t = two_sum(x.lo, y.lo);
  double c = s.lo + t.hi;
  DD v = fast_two_sum(s.hi, c);
  double w = t.lo + v.lo;
  return fast_two_sum(v.hi, w);
}

inline DD dd_add(DD x, double y) {
  DD s = two_sum(x.hi, y);
  double v = x.lo + s.lo;
  return fast_two_sum(s.hi, v);
}

// DWTimesDW with fma; relative error < 5*2^-106.
inline DD dd_mul(DD x, DD y) {
  DD p = two_prod(x.hi, y.hi);
  double t = std::fma(x.hi, y.lo, x.lo * y.hi);
  return fast_two_sum(p.hi, p.lo + t);
}

// x * s for a double scalar s (exact two_prod on the high part).
inline DD dd_mul_scalar(DD x, double s) {
  DD p = two_prod(x.hi, s);
  return fast_two_sum(p.hi, std::fma(x.lo, s, p.lo));
}

inline DD dd_normalize(double hi, double lo) { return fast_two_sum(hi, lo); }

}  // namespace crvec
