#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <mpfr.h>

#include <cmath>
#include <random>

#include "crvec/dd.hpp"
#include "crvec/fpbits.hpp"

using namespace crvec;

namespace {

// Relative error of a DD value against an exact 256-bit reference.
double rel_err_vs(mpfr_srcptr ref, DD v) {
  MPFR_DECL_INIT(t, 256);
  mpfr_set_d(t, v.hi, MPFR_RNDN);
  mpfr_add_d(t, t, v.lo, MPFR_RNDN);
  mpfr_sub(t, t, ref, MPFR_RNDN);
  if (mpfr_zero_p(ref)) return mpfr_zero_p(t) ? 0.0 : 1.0;
  mpfr_div(t, t, ref, MPFR_RNDN);
  mpfr_abs(t, t, MPFR_RNDN);
  return mpfr_get_d(t, MPFR_RNDU);
}

double rand_normalish(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(-40.0, 40.0);
  std::uniform_real_distribution<double> frac(1.0, 2.0);
  double s = (rng() & 1) ? -1.0 : 1.0;
  return s * std::ldexp(frac(rng), static_cast<int>(mag(rng)));
}

DD rand_dd(std::mt19937_64& rng) {
  double hi = rand_normalish(rng);
  double lo = hi * std::ldexp(rand_normalish(rng) / 128.0, -53);
  return fast_two_sum(hi, lo);
}

}  // namespace

TEST_CASE("two_sum and two_prod are exact") {
  std::mt19937_64 rng(1);
  MPFR_DECL_INIT(r, 256);
  for (int i = 0; i < 200'000; ++i) {
    double a = rand_normalish(rng), b = rand_normalish(rng);
    DD s = two_sum(a, b);
    mpfr_set_d(r, a, MPFR_RNDN);
    mpfr_add_d(r, r, b, MPFR_RNDN);
    CHECK(rel_err_vs(r, s) == 0.0);
    DD p = two_prod(a, b);
    mpfr_set_d(r, a, MPFR_RNDN);
    mpfr_mul_d(r, r, b, MPFR_RNDN);
    CHECK(rel_err_vs(r, p) == 0.0);
  }
}

TEST_CASE("dd identities") {
  DD one{1.0, 0.0};
  DD x{0x1.921fb54442d18p+1, 0x1.1a62633145c07p-53};
  DD p = dd_mul(one, x);
  CHECK(p.hi == x.hi);
  CHECK(p.lo == x.lo);
  DD z = dd_add(DD{1.0, 0.0}, DD{-1.0, 0.0});
  CHECK(z.hi == 0.0);
  CHECK(z.lo == 0.0);
}

TEST_CASE("dd_add / dd_mul error bounds vs 256-bit reference") {
  std::mt19937_64 rng(42);
  MPFR_DECL_INIT(r, 256);
  MPFR_DECL_INIT(t, 256);
  MPFR_DECL_INIT(sum, 256);
  MPFR_DECL_INIT(prod, 256);
  double worst_add = 0.0, worst_mul = 0.0, worst_muls = 0.0;
  for (int i = 0; i < 300'000; ++i) {
    DD a = rand_dd(rng), b = rand_dd(rng);
    mpfr_set_d(r, a.hi, MPFR_RNDN);
    mpfr_add_d(r, r, a.lo, MPFR_RNDN);
    mpfr_set_d(t, b.hi, MPFR_RNDN);
    mpfr_add_d(t, t, b.lo, MPFR_RNDN);

    mpfr_add(sum, r, t, MPFR_RNDN);
    worst_add = std::max(worst_add, rel_err_vs(sum, dd_add(a, b)));

    mpfr_mul(prod, r, t, MPFR_RNDN);
    worst_mul = std::max(worst_mul, rel_err_vs(prod, dd_mul(a, b)));

    double s = static_cast<double>(static_cast<std::int64_t>(rng() % 4001) - 2000);
    if (s != 0.0) {
      mpfr_mul_d(prod, r, s, MPFR_RNDN);
      worst_muls = std::max(worst_muls, rel_err_vs(prod, dd_mul_scalar(a, s)));
    }
  }
  CHECK(worst_add <= 0x1p-104);
  CHECK(worst_mul <= 0x1p-102);
  CHECK(worst_muls <= 0x1p-102);
}

TEST_CASE("dd results stay normalized") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200'000; ++i) {
    DD a = rand_dd(rng), b = rand_dd(rng);
    for (DD v : {dd_add(a, b), dd_mul(a, b)}) {
      CHECK(v.hi == v.hi + v.lo);  // hi == RN(hi + lo)
      if (v.hi != 0.0) CHECK(std::fabs(v.lo) <= std::ldexp(std::fabs(v.hi), -52));
    }
  }
}
