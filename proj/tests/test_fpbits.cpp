#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <mpfr.h>

#include <cmath>
#include <random>

#include "crvec/fpbits.hpp"

using namespace crvec;

namespace {

// Independent conversion oracle: exact value into mpfr, rounded to binary32
// with mpfr's emulated IEEE single (emin/emax + subnormalize). Never touches
// the library's rounding engine.
Binary32 mpfr_convert(Binary64 v, RoundingMode mode) {
  if (v.is_nan()) {
    std::uint32_t payload = static_cast<std::uint32_t>(v.mantissa_field() >> 29) & 0x3FFFFFu;
    return Binary32((static_cast<std::uint32_t>(v.sign()) << 31) | 0x7FC00000u | payload);
  }
  mpfr_rnd_t r = MPFR_RNDN;
  switch (mode) {
    case RoundingMode::NearestEven: r = MPFR_RNDN; break;
    case RoundingMode::TowardZero: r = MPFR_RNDZ; break;
    case RoundingMode::TowardPositive: r = MPFR_RNDU; break;
    case RoundingMode::TowardNegative: r = MPFR_RNDD; break;
  }
  mpfr_exp_t old_emin = mpfr_get_emin(), old_emax = mpfr_get_emax();
  mpfr_set_emin(-148);
  mpfr_set_emax(128);
  MPFR_DECL_INIT(m, 24);
  int t = mpfr_set_d(m, v.to_double(), r);
  t = mpfr_check_range(m, t, r);
  mpfr_subnormalize(m, t, r);
  float f = mpfr_get_flt(m, r);
  mpfr_set_emin(old_emin);
  mpfr_set_emax(old_emax);
  if (mpfr_zero_p(m) && v.sign()) f = -0.0f;
  return Binary32::from_float(f);
}

}  // namespace

TEST_CASE("decompose/compose round trip") {
  CHECK(decompose(Binary64::from_double(1.0)).sign == 0);
  CHECK(decompose(Binary64::from_double(1.0)).biased_exponent == 1023);
  CHECK(decompose(Binary64::from_double(1.0)).mantissa_field == 0);
  auto neg0 = decompose(Binary64::from_double(-0.0));
  CHECK(neg0.sign == 1);
  CHECK(neg0.biased_exponent == 0);
  CHECK(neg0.mantissa_field == 0);
  auto inf = decompose(f64_pos_inf);
  CHECK(inf.biased_exponent == 2047);
  CHECK(inf.mantissa_field == 0);

  std::mt19937_64 rng(12345);
  for (int i = 0; i < 2'000'000; ++i) {
    Binary64 x(rng());
    CHECK(compose(decompose(x)) == x);
  }
  for (std::uint64_t b : {0ull, 1ull, 0x7FF0000000000000ull, 0x7FFFFFFFFFFFFFFFull,
                          0x8000000000000000ull, 0xFFFFFFFFFFFFFFFFull,
                          0x000FFFFFFFFFFFFFull, 0x0010000000000000ull}) {
    CHECK(compose(decompose(Binary64(b))) == Binary64(b));
  }
}

TEST_CASE("convert_f64_to_f32 knowns") {
  for (auto m : all_rounding_modes) {
    CHECK(convert_f64_to_f32(Binary64::from_double(1.5), m) == Binary32::from_float(1.5f));
  }
  // 2^-150: exact tie between 0 and the minimum subnormal.
  CHECK(convert_f64_to_f32(Binary64::from_double(0x1p-150), RoundingMode::NearestEven) ==
        f32_pos_zero);
  CHECK(convert_f64_to_f32(Binary64::from_double(0x1p-150), RoundingMode::TowardPositive) ==
        Binary32(1));
  // Directed overflow clamps to the largest finite.
  double big = 0x1p128 * (1.0 - 0x1p-30);
  CHECK(convert_f64_to_f32(Binary64::from_double(big), RoundingMode::TowardZero) ==
        f32_max_finite);
  CHECK(convert_f64_to_f32(Binary64::from_double(big), RoundingMode::NearestEven) ==
        f32_pos_inf);
  CHECK(convert_f64_to_f32(Binary64::from_double(-big), RoundingMode::TowardPositive) ==
        Binary32(0x80000000u | f32_max_finite.bits));
  // Signed zero and NaN policy.
  CHECK(convert_f64_to_f32(Binary64::from_double(-0.0), RoundingMode::NearestEven) ==
        f32_neg_zero);
  Binary64 nan_payload(0x7FF0123456789ABCull);
  Binary32 q = convert_f64_to_f32(nan_payload, RoundingMode::NearestEven);
  CHECK(q.is_nan());
  CHECK((q.bits & 0x00400000u) != 0);
}

TEST_CASE("convert_f64_to_f32 vs mpfr oracle, random patterns") {
  std::mt19937_64 rng(987654);
  for (int i = 0; i < 1'000'000; ++i) {
    Binary64 v(rng());
    for (auto m : all_rounding_modes) {
      Binary32 got = convert_f64_to_f32(v, m);
      Binary32 want = mpfr_convert(v, m);
      if (got.bits != want.bits) {
        CAPTURE(v.bits);
        CAPTURE(static_cast<int>(m));
        CHECK(got.bits == want.bits);
        return;
      }
    }
  }
}

TEST_CASE("convert_f64_to_f32 vs mpfr oracle, boundary neighbourhoods") {
  // Dense patterns around every binary32 exponent boundary, the subnormal
  // threshold, and the overflow threshold.
  std::vector<double> anchors;
  for (int k = -151; k <= 129; ++k) anchors.push_back(std::ldexp(1.0, k));
  anchors.push_back(0x1.fffffep127);   // max finite f32
  anchors.push_back(0x1p-149);         // min subnormal f32
  for (double a : anchors) {
    for (int sign = 0; sign < 2; ++sign) {
      std::uint64_t base = Binary64::from_double(sign ? -a : a).bits;
      for (std::int64_t d = -300; d <= 300; ++d) {
        Binary64 v(base + static_cast<std::uint64_t>(d));
        if (v.is_nan()) continue;
        for (auto m : all_rounding_modes) {
          Binary32 got = convert_f64_to_f32(v, m);
          Binary32 want = mpfr_convert(v, m);
          REQUIRE(got.bits == want.bits);
        }
      }
    }
  }
}

TEST_CASE("conversion monotone per mode and mode-ordered") {
  std::mt19937_64 rng(5150);
  auto as_ordered = [](Binary32 x) {
    std::int64_t mag = x.bits & 0x7FFFFFFF;
    return x.sign() ? -mag - 1 : mag;
  };
  for (int i = 0; i < 300'000; ++i) {
    Binary64 v1(rng()), v2(rng());
    if (v1.is_nan() || v2.is_nan()) continue;
    if (v1.to_double() > v2.to_double()) std::swap(v1, v2);
    for (auto m : all_rounding_modes) {
      CHECK(as_ordered(convert_f64_to_f32(v1, m)) <= as_ordered(convert_f64_to_f32(v2, m)));
    }
    Binary64 v = v1;
    float dn = convert_f64_to_f32(v, RoundingMode::TowardNegative).to_float();
    float rn = convert_f64_to_f32(v, RoundingMode::NearestEven).to_float();
    float up = convert_f64_to_f32(v, RoundingMode::TowardPositive).to_float();
    float rz = convert_f64_to_f32(v, RoundingMode::TowardZero).to_float();
    CHECK(dn <= rn);
    CHECK(rn <= up);
    CHECK(std::fabs(rz) <= std::fabs(rn));
  }
}

TEST_CASE("ulp32_distance") {
  Binary32 one = Binary32::from_float(1.0f);
  CHECK(ulp32_distance(one, one) == 0);
  CHECK(ulp32_distance(one, Binary32(one.bits + 1)) == 1);
  CHECK(ulp32_distance(f32_neg_zero, f32_pos_zero) == 1);
  CHECK(ulp32_distance(Binary32::from_float(-1.0f), one) ==
        2ull * 0x3F800000ull + 1);
  CHECK(!ulp32_distance(f32_qnan, one).has_value());
  CHECK(ulp32_distance(f32_max_finite, f32_pos_inf) == 1);
  // ordered mapping inverse
  for (std::int64_t o : {-5LL, -1LL, 0LL, 1LL, 100LL}) {
    std::int64_t mag = o;
    CHECK(ordered32(from_ordered32(o)) == o);
    (void)mag;
  }
}

TEST_CASE("round_sig exactness flag") {
  SigParts p;
  p.exponent = 3;
  p.mant = 1ull << 63;
  auto r = round_sig_to_binary32(p, RoundingMode::NearestEven);
  CHECK(r.value == Binary32::from_float(8.0f));
  CHECK(!r.inexact);
  p.sticky = true;
  CHECK(round_sig_to_binary32(p, RoundingMode::NearestEven).inexact);
  CHECK(round_sig_to_binary32(p, RoundingMode::TowardPositive).value ==
        Binary32(Binary32::from_float(8.0f).bits + 1));
}
