#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "crvec/lanes.hpp"

using namespace crvec;
namespace op = crvec::lanes::op;

namespace {

// Independent oracle for the round-to-zero emulation: mpfr computes the
// correctly rounded fma at binary64 precision/range directly.
double mpfr_fma_rz(double a, double b, double c) {
  mpfr_exp_t old_emin = mpfr_get_emin(), old_emax = mpfr_get_emax();
  mpfr_set_emin(-1073);
  mpfr_set_emax(1024);
  MPFR_DECL_INIT(ma, 53);
  MPFR_DECL_INIT(mb, 53);
  MPFR_DECL_INIT(mc, 53);
  MPFR_DECL_INIT(mr, 53);
  mpfr_set_d(ma, a, MPFR_RNDZ);
  mpfr_set_d(mb, b, MPFR_RNDZ);
  mpfr_set_d(mc, c, MPFR_RNDZ);
  int t = mpfr_fma(mr, ma, mb, mc, MPFR_RNDZ);
  t = mpfr_check_range(mr, t, MPFR_RNDZ);
  mpfr_subnormalize(mr, t, MPFR_RNDZ);
  double r = mpfr_get_d(mr, MPFR_RNDZ);
  if (mpfr_zero_p(mr)) {
    // mpfr does not model the IEEE zero-sign rules of the fma; recover them
    // from the hardware nearest result, which agrees on exact zeros.
    r = std::copysign(r, std::fma(a, b, c));
  }
  mpfr_set_emin(old_emin);
  mpfr_set_emax(old_emax);
  return r;
}

double rand_interesting(std::mt19937_64& rng, int klass) {
  switch (klass & 3) {
    case 0:
      return Binary64(rng()).to_double();  // any pattern
    case 1: {
      std::uniform_real_distribution<double> d(-64.0, 64.0);
      return d(rng);
    }
    case 2:
      return Binary64(rng() & 0x800FFFFFFFFFFFFFull).to_double();  // subnormal
    default: {
      std::uniform_real_distribution<double> d(0.9375, 1.0625);
      return d(rng);
    }
  }
}

bool same_bits(double a, double b) {
  return Binary64::from_double(a) == Binary64::from_double(b) ||
         (std::isnan(a) && std::isnan(b));
}

}  // namespace

TEST_CASE("fma_rn basics and fusedness") {
  CHECK(op::fma_rn(1.0, 1.0, 1.0) == 2.0);
  CHECK(op::fma_rn(0x1p-30, 0x1p-30, -0x1p-60) == 0.0);  // fused: exact zero
  double a = 0x1.0000001p0;
  CHECK(same_bits(op::fma_rn(a, a, 0.0), std::fma(a, a, 0.0)));
}

TEST_CASE("round-to-zero emulation knowns") {
  CHECK(op::add_rz(1.0, 0x1p-60) == 1.0);
  CHECK(op::fma_rz(-1.0, 0x1p-60, -1.0) == -1.0);
  CHECK(op::add_rz(1.0, 0x1.8p-52) == 1.0 + 0x1p-52);  // exact, no step
  // Nearest would round up; truncation steps back down.
  CHECK(op::add_rz(1.0, 0x1p-53 + 0x1p-60) == 1.0);
}

TEST_CASE("fma_rz/add_rz/mul_rz vs mpfr oracle") {
  std::mt19937_64 rng(20240817);
  int checked = 0;
  for (int i = 0; i < 2'000'000; ++i) {
    double a = rand_interesting(rng, static_cast<int>(rng()));
    double b = rand_interesting(rng, static_cast<int>(rng()));
    double c = rand_interesting(rng, static_cast<int>(rng()));
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
    ++checked;
    double got = op::fma_rz(a, b, c);
    double want = mpfr_fma_rz(a, b, c);
    if (!same_bits(got, want)) {
      CAPTURE(Binary64::from_double(a).bits);
      CAPTURE(Binary64::from_double(b).bits);
      CAPTURE(Binary64::from_double(c).bits);
      REQUIRE(same_bits(got, want));
    }
    double ga = op::add_rz(a, c);
    double wa = mpfr_fma_rz(a, 1.0, c);
    if (a + c == 0.0 && a != 0.0) wa = std::copysign(wa, a + c);
    REQUIRE(same_bits(ga, wa));
    double gm = op::mul_rz(a, b);
    double wm = mpfr_fma_rz(a, b, std::signbit(a) == std::signbit(b) ? 0.0 : -0.0);
    REQUIRE(same_bits(gm, wm));
  }
  CHECK(checked > 1'000'000);
}

TEST_CASE("fma_rz magnitude never exceeds fma_rn") {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 1'000'000; ++i) {
    double a = rand_interesting(rng, static_cast<int>(rng()));
    double b = rand_interesting(rng, static_cast<int>(rng()));
    double c = rand_interesting(rng, static_cast<int>(rng()));
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
    double rn = op::fma_rn(a, b, c);
    double rz = op::fma_rz(a, b, c);
    if (!std::isfinite(rn)) continue;
    CHECK(std::fabs(rz) <= std::fabs(rn));
    auto d = ulp64_distance(Binary64::from_double(rz), Binary64::from_double(rn));
    REQUIRE(d.has_value());
    CHECK(*d <= 1);
  }
}

TEST_CASE("reduce_frac") {
  double r = op::reduce_frac(0.3, 3);
  CHECK(r == 0.3 - 0.25);  // exact by Sterbenz
  CHECK(op::reduce_frac(2.0, 3) == 0.0);
  CHECK(op::reduce_frac(std::numeric_limits<double>::infinity(), 3) == 0.0);
  CHECK(!std::signbit(op::reduce_frac(std::numeric_limits<double>::infinity(), 3)));
  CHECK(std::isnan(op::reduce_frac(std::nan(""), 3)));

  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> d(-200.0, 200.0);
  MPFR_DECL_INIT(t, 128);
  MPFR_DECL_INIT(n, 128);
  for (int i = 0; i < 1'000'000; ++i) {
    double x = d(rng);
    double got = op::reduce_frac(x, 3);
    mpfr_set_d(t, x, MPFR_RNDN);
    mpfr_mul_2si(t, t, 3, MPFR_RNDN);
    mpfr_rint(n, t, MPFR_RNDN);  // nearest integer, ties to even
    mpfr_sub(t, t, n, MPFR_RNDN);
    mpfr_mul_2si(t, t, -3, MPFR_RNDN);
    double want = mpfr_get_d(t, MPFR_RNDN);
    REQUIRE(got == want);
    CHECK(std::fabs(got) <= 0x1p-4);
    double k = (x - got) * 8.0;  // x - R is a multiple of 2^-3
    CHECK(k == std::nearbyint(k));
  }
}

TEST_CASE("shifter_index") {
  CHECK(op::shifter_index(2.6, 0x1.8p+49, 3) == 5);
  CHECK(op::shifter_index(0.0, 0x1.8p+49, 3) == 0);
  // round(-0.0625 * 8) = round(-0.5) = 0 under ties-to-even.
  CHECK(op::shifter_index(-0.0625, 0x1.8p+49, 3) == 0);

  std::mt19937_64 rng(444);
  std::uniform_real_distribution<double> d(-4000.0, 4000.0);
  MPFR_DECL_INIT(t, 128);
  mpz_t z;
  mpz_init(z);
  for (int i = 0; i < 500'000; ++i) {
    double x = d(rng);
    std::int64_t got = op::shifter_index(x, 0x1.8p+49, 3);
    mpfr_set_d(t, x, MPFR_RNDN);
    mpfr_mul_2si(t, t, 3, MPFR_RNDN);
    mpfr_get_z(z, t, MPFR_RNDN);
    std::int64_t want = static_cast<std::int64_t>(mpz_fdiv_ui(z, 8));
    REQUIRE(got == want);
  }
  mpz_clear(z);
}

TEST_CASE("getmant / getexp") {
  CHECK(op::getmant_075_15(6.0) == 0.75);
  CHECK(op::getmant_075_15(1.25) == 1.25);
  CHECK(std::isnan(op::getmant_075_15(-3.0)));
  CHECK(op::getmant_075_15(0.0) == 1.0);
  CHECK(op::getmant_075_15(-0.0) == 1.0);
  CHECK(op::getmant_075_15(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(op::getexp(6.0) == 2.0);
  CHECK(op::getexp(0x1p-149) == -149.0);
  CHECK(op::getexp(0.0) == -std::numeric_limits<double>::infinity());
  CHECK(op::getexp(std::numeric_limits<double>::infinity()) ==
        std::numeric_limits<double>::infinity());

  std::mt19937_64 rng(999);
  for (int i = 0; i < 1'000'000; ++i) {
    Binary64 xb(rng());
    double x = xb.to_double();
    if (!(x > 0.0) || std::isinf(x)) continue;
    double m = op::getmant_075_15(x);
    CHECK(m >= 0.75);
    CHECK(m < 1.5);
    int e2;
    double fr = std::frexp(x, &e2);
    double want = fr < 0.75 ? fr * 2.0 : fr;
    REQUIRE(m == want);
    REQUIRE(op::getexp(x) == static_cast<double>(std::ilogb(x)));
  }
}

TEST_CASE("scalef") {
  CHECK(op::scalef(1.5, 3.7) == 12.0);
  CHECK(op::scalef(1.0, -std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(!std::signbit(op::scalef(1.0, -std::numeric_limits<double>::infinity())));
  CHECK(op::scalef(1.0, 1.0e9) == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(op::scalef(0.0, std::numeric_limits<double>::infinity())));
  CHECK(std::isnan(op::scalef(std::numeric_limits<double>::infinity(),
                              -std::numeric_limits<double>::infinity())));
  CHECK(op::scalef(-0.0, 5.0) == 0.0);
  CHECK(std::signbit(op::scalef(-0.0, 5.0)));

  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> xs(-2.0, 2.0);
  std::uniform_real_distribution<double> ys(-1300.0, 1300.0);
  for (int i = 0; i < 500'000; ++i) {
    double x = xs(rng), y = ys(rng);
    double want = std::ldexp(x, static_cast<int>(std::floor(y)));
    REQUIRE(op::scalef(x, y) == want);
  }
}

TEST_CASE("permute/gather/select/compare") {
  std::array<double, 8> table{0, 1, 2, 3, 4, 5, 6, 7};
  Batch<std::int64_t, 4> idx;
  idx.lane = {0, 9, -1, 7};
  auto r = lanes::permute_table<4>(std::span<const double>(table), idx);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);  // 9 mod 8
  CHECK(r[2] == 7.0);  // -1 mod 8
  CHECK(r[3] == 7.0);

  std::array<std::int64_t, 16> t64;
  for (int i = 0; i < 16; ++i) t64[static_cast<std::size_t>(i)] = 100 + i;
  Batch<std::int64_t, 4> gi;
  gi.lane = {3, 0, 15, 7};
  auto g = lanes::gather64<4>(std::span<const std::int64_t>(t64), gi);
  CHECK(g[1] == 100);
  CHECK(g[2] == 115);

  Batch<double, 4> a = Batch<double, 4>::broadcast(0.0);
  Batch<double, 4> b;
  b.lane = {-0.0, 1.0, std::nan(""), 0.0};
  auto m = lanes::compare_neq_mask(a, b);
  CHECK(!m[0]);  // signed zeros compare equal
  CHECK(m[1]);
  CHECK(m[2]);  // NaN unequal to everything
  CHECK(!m[3]);

  auto nan_mask = lanes::compare_neq_mask(b, b);
  CHECK(nan_mask[2]);
  CHECK(!nan_mask[0]);
}

TEST_CASE("lane independence under permutation") {
  std::mt19937_64 rng(606);
  for (int rep = 0; rep < 2000; ++rep) {
    Batch<double, 8> x, y;
    for (int i = 0; i < 8; ++i) {
      x[i] = rand_interesting(rng, static_cast<int>(rng()));
      y[i] = rand_interesting(rng, static_cast<int>(rng()));
    }
    auto r = lanes::fma_rz(x, y, x);
    std::array<int, 8> perm{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(perm.begin(), perm.end(), rng);
    Batch<double, 8> xp, yp;
    for (int i = 0; i < 8; ++i) {
      xp[i] = x[perm[static_cast<std::size_t>(i)]];
      yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    auto rp = lanes::fma_rz(xp, yp, xp);
    for (int i = 0; i < 8; ++i)
      REQUIRE(same_bits(rp[i], r[perm[static_cast<std::size_t>(i)]]));
  }
}

TEST_CASE("deterministic NaN policy") {
  double snan = Binary64(0x7FF0000000000001ull).to_double();
  double q = op::fma_rn(snan, 1.0, 1.0);
  CHECK(Binary64::from_double(q).bits == 0x7FF8000000000001ull);
  double q2 = op::add_rz(1.0, Binary64(0xFFF000000000BEEFull).to_double());
  CHECK(Binary64::from_double(q2).bits == 0xFFF800000000BEEFull);
  CHECK(Binary64::from_double(op::fma_rn(std::numeric_limits<double>::infinity(), 0.0, 1.0)).bits ==
        f64_qnan.bits);
}
