#include "crvec/oracle.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crvec {

const char* func_name(FuncId f) noexcept {
  switch (f) {
    case FuncId::exp2: return "exp2";
    case FuncId::log: return "log";
    case FuncId::log2: return "log2";
  }
  return "?";
}

namespace oracle {

BigFixed::BigFixed() : BigFixed(96) {}

BigFixed::BigFixed(int precision) {
  auto* p = new __mpfr_struct;
  mpfr_init2(p, precision);
  rep_ = p;
}

BigFixed::BigFixed(const BigFixed& o) {
  auto* p = new __mpfr_struct;
  mpfr_init2(p, mpfr_get_prec(static_cast<mpfr_ptr>(o.rep_)));
  mpfr_set(p, static_cast<mpfr_ptr>(o.rep_), MPFR_RNDN);
  rep_ = p;
}

BigFixed::BigFixed(BigFixed&& o) noexcept : rep_(o.rep_) { o.rep_ = nullptr; }

BigFixed& BigFixed::operator=(const BigFixed& o) {
  if (this != &o) {
    auto* p = static_cast<mpfr_ptr>(rep_);
    mpfr_set_prec(p, mpfr_get_prec(static_cast<mpfr_ptr>(o.rep_)));
    mpfr_set(p, static_cast<mpfr_ptr>(o.rep_), MPFR_RNDN);
  }
  return *this;
}

BigFixed& BigFixed::operator=(BigFixed&& o) noexcept {
  std::swap(rep_, o.rep_);
  return *this;
}

BigFixed::~BigFixed() {
  if (rep_) {
    mpfr_clear(static_cast<mpfr_ptr>(rep_));
    delete static_cast<__mpfr_struct*>(rep_);
  }
}

int BigFixed::precision() const { return static_cast<int>(mpfr_get_prec(static_cast<mpfr_ptr>(rep_))); }
bool BigFixed::negative() const { return mpfr_sgn(static_cast<mpfr_ptr>(rep_)) < 0; }
bool BigFixed::zero() const { return mpfr_zero_p(static_cast<mpfr_ptr>(rep_)) != 0; }
std::int64_t BigFixed::exponent() const { return mpfr_get_exp(static_cast<mpfr_ptr>(rep_)); }
double BigFixed::to_double() const { return mpfr_get_d(static_cast<mpfr_ptr>(rep_), MPFR_RNDN); }

BigFixed eval_hp(FuncId f, double x, int prec) {
  if (prec < 64 || prec > 4096) throw std::domain_error("eval_hp: precision out of range");
  if (!std::isfinite(x)) throw std::domain_error("eval_hp: non-finite input");
  if ((f == FuncId::log || f == FuncId::log2) && x <= 0.0)
    throw std::domain_error("eval_hp: log of non-positive value");
  if (f == FuncId::exp2 && std::fabs(x) > 0x1p60)
    throw std::domain_error("eval_hp: exp2 exponent out of working range");
  BigFixed out(prec);
  MPFR_DECL_INIT(xm, 64);
  mpfr_set_d(xm, x, MPFR_RNDN);
  switch (f) {
    case FuncId::exp2: mpfr_exp2(static_cast<mpfr_ptr>(out.raw()), xm, MPFR_RNDN); break;
    case FuncId::log: mpfr_log(static_cast<mpfr_ptr>(out.raw()), xm, MPFR_RNDN); break;
    case FuncId::log2: mpfr_log2(static_cast<mpfr_ptr>(out.raw()), xm, MPFR_RNDN); break;
  }
  return out;
}

}  // namespace oracle

namespace {

// Per-thread mpfr scratch; fresh mpfr allocations per call would dominate
// the exhaustive sweeps.
struct Scratch {
  mpfr_t x, v, err, lo, hi, t;
  mpz_t z;
  bool init = false;

  void ensure() {
    if (!init) {
      mpfr_init2(x, 64);
      mpfr_init2(v, 160);
      mpfr_init2(err, 64);
      mpfr_init2(lo, 168);
      mpfr_init2(hi, 168);
      mpfr_init2(t, 224);
      mpz_init(z);
      init = true;
    }
  }
  ~Scratch() {
    if (init) {
      mpfr_clear(x);
      mpfr_clear(v);
      mpfr_clear(err);
      mpfr_clear(lo);
      mpfr_clear(hi);
      mpfr_clear(t);
      mpz_clear(z);
      mpfr_free_cache();
    }
  }
};

thread_local Scratch scratch;

// Exact extraction of an mpfr value for the shared rounding engine:
// top 64 significand bits plus sticky.
SigParts sig_parts_from(mpfr_srcptr m, mpz_ptr z) {
  SigParts p;
  p.sign = mpfr_sgn(m) < 0;
  if (mpfr_zero_p(m)) return p;
  mpfr_exp_t e = mpfr_get_z_2exp(z, m);
  mpz_abs(z, z);
  std::int64_t msb = static_cast<std::int64_t>(mpz_sizeinbase(z, 2)) - 1;
  p.exponent = static_cast<std::int64_t>(e) + msb;
  if (msb >= 64) {
    unsigned long shift = static_cast<unsigned long>(msb - 63);
    p.sticky = mpz_scan1(z, 0) < shift;
    mpz_fdiv_q_2exp(z, z, shift);
  }
  std::uint64_t mant = mpz_get_ui(z);
  if (msb < 63) mant <<= (63 - msb);
  p.mant = mant;
  return p;
}

SigParts integer_sig(std::int64_t n) {
  SigParts p;
  if (n == 0) return p;
  p.sign = n < 0;
  std::uint64_t mag = p.sign ? 0 - static_cast<std::uint64_t>(n) : static_cast<std::uint64_t>(n);
  int msb = 63 - std::countl_zero(mag);
  p.exponent = msb;
  p.mant = mag << (63 - msb);
  return p;
}

SigParts pow2_sig(std::int64_t n) {
  SigParts p;
  p.exponent = n;
  p.mant = 1ull << 63;
  return p;
}

// "Somewhere strictly inside (2^n, 2^(n+1))"; used when the exact value is
// not known but provably shares one rounding gap with this interval.
SigParts open_interval_above_pow2(std::int64_t n) {
  SigParts p = pow2_sig(n);
  p.sticky = true;
  return p;
}

// "Somewhere strictly inside (1 - 2^-64, 1)".
SigParts open_interval_below_one() {
  SigParts p;
  p.exponent = -1;
  p.mant = ~0ull;
  p.sticky = true;
  return p;
}

// Inputs the Ziv ladder never sees: IEEE specials, algebraically exact
// results, and ranges where the result provably saturates or pins to the
// gap next to 1. `parts` cases are rounded per mode by the caller.
struct Shortcut {
  enum class Kind { none, direct, parts } kind = Kind::none;
  Binary64 direct;
  SigParts parts;
  bool value_exact = false;  // parts carry the exact function value
};

Shortcut shortcut_eval(FuncId f, Binary64 x, bool target_f32) {
  Shortcut s;
  if (x.is_nan()) {
    s.kind = Shortcut::Kind::direct;
    s.direct = quiet(x);
    return s;
  }
  double xd = x.to_double();
  if (f == FuncId::exp2) {
    if (x.is_zero()) {
      s.kind = Shortcut::Kind::parts;
      s.parts = integer_sig(1);
      s.value_exact = true;
      return s;
    }
    if (x == f64_pos_inf) {
      s.kind = Shortcut::Kind::direct;
      s.direct = f64_pos_inf;
      return s;
    }
    if (x == f64_neg_inf) {
      s.kind = Shortcut::Kind::direct;
      s.direct = Binary64(0);
      return s;
    }
    if (xd == std::floor(xd) && std::fabs(xd) <= 0x1p40) {
      s.kind = Shortcut::Kind::parts;
      s.parts = pow2_sig(static_cast<std::int64_t>(xd));
      s.value_exact = true;
      return s;
    }
    double sat_hi = target_f32 ? 128.0 : 1024.0;
    double sat_lo = target_f32 ? -150.0 : -1075.0;
    if (xd > sat_hi) {
      // 2^x > 2^sat_hi: every value there rounds identically.
      s.kind = Shortcut::Kind::parts;
      s.parts = open_interval_above_pow2(static_cast<std::int64_t>(sat_hi));
      return s;
    }
    if (xd < sat_lo) {
      s.kind = Shortcut::Kind::parts;
      s.parts = open_interval_above_pow2(static_cast<std::int64_t>(sat_lo) - 1);
      return s;
    }
    double tiny = target_f32 ? 0x1p-26 : 0x1p-55;
    if (std::fabs(xd) <= tiny) {
      // |2^x - 1| < 2^-25.5 (resp. 2^-54.5): pinned to the gap beside 1.
      s.kind = Shortcut::Kind::parts;
      s.parts = xd > 0.0 ? open_interval_above_pow2(0) : open_interval_below_one();
      return s;
    }
    return s;
  }
  // log / log2
  if (x.is_zero()) {
    s.kind = Shortcut::Kind::direct;
    s.direct = f64_neg_inf;
    return s;
  }
  if (x.sign()) {
    s.kind = Shortcut::Kind::direct;
    s.direct = f64_qnan;
    return s;
  }
  if (x == f64_pos_inf) {
    s.kind = Shortcut::Kind::direct;
    s.direct = f64_pos_inf;
    return s;
  }
  if (xd == 1.0) {
    s.kind = Shortcut::Kind::parts;
    s.parts = SigParts{};  // +0
    s.value_exact = true;
    return s;
  }
  if (f == FuncId::log2) {
    int e2;
    if (std::frexp(xd, &e2) == 0.5) {  // power of two (subnormals included)
      s.kind = Shortcut::Kind::parts;
      s.parts = integer_sig(e2 - 1);
      s.value_exact = true;
      return s;
    }
  }
  return s;
}

void eval_into(mpfr_ptr out, FuncId f, mpfr_srcptr x) {
  switch (f) {
    case FuncId::exp2: mpfr_exp2(out, x, MPFR_RNDN); break;
    case FuncId::log: mpfr_log(out, x, MPFR_RNDN); break;
    case FuncId::log2: mpfr_log2(out, x, MPFR_RNDN); break;
  }
}

// Enclose f(x) at the given precision: [lo, hi] with the evaluation's
// 0.5-ulp error bound inflated outward.
void enclose(FuncId f, int prec) {
  mpfr_set_prec(scratch.v, prec);
  eval_into(scratch.v, f, scratch.x);
  mpfr_set_prec(scratch.lo, prec + 8);
  mpfr_set_prec(scratch.hi, prec + 8);
  mpfr_abs(scratch.err, scratch.v, MPFR_RNDU);
  mpfr_mul_2si(scratch.err, scratch.err, 1 - prec, MPFR_RNDU);
  mpfr_sub(scratch.lo, scratch.v, scratch.err, MPFR_RNDD);
  mpfr_add(scratch.hi, scratch.v, scratch.err, MPFR_RNDU);
}

}  // namespace

ZivResult32 ziv_correctly_round_f32(FuncId f, Binary32 x, RoundingMode mode,
                                    int start_prec) {
  if (x.is_nan()) return {quiet(x), 0, false};
  Binary64 wide = Binary64::from_double(static_cast<double>(x.to_float()));
  Shortcut s = shortcut_eval(f, wide, /*target_f32=*/true);
  if (s.kind == Shortcut::Kind::direct)
    return {convert_f64_to_f32(s.direct, mode), 0, false};
  if (s.kind == Shortcut::Kind::parts) {
    Rounded32 r = round_sig_to_binary32(s.parts, mode);
    return {r.value, 0, s.value_exact && !r.inexact};
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, wide.to_double(), MPFR_RNDN);
  for (int prec : ziv_ladder) {
    if (prec < start_prec) continue;
    enclose(f, prec);
    Rounded32 rlo = round_sig_to_binary32(sig_parts_from(scratch.lo, scratch.z), mode);
    Rounded32 rhi = round_sig_to_binary32(sig_parts_from(scratch.hi, scratch.z), mode);
    if (rlo.value == rhi.value) return {rlo.value, prec, false};
  }
  throw std::runtime_error("ziv_correctly_round: undecidable at precision cap");
}

ZivResult64 ziv_correctly_round_f64(FuncId f, Binary64 x, RoundingMode mode,
                                    int start_prec) {
  Shortcut s = shortcut_eval(f, x, /*target_f32=*/false);
  if (s.kind == Shortcut::Kind::direct) return {s.direct, 0, false};
  if (s.kind == Shortcut::Kind::parts) {
    Rounded64 r = round_sig_to_binary64(s.parts, mode);
    return {r.value, 0, s.value_exact && !r.inexact};
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, x.to_double(), MPFR_RNDN);
  for (int prec : ziv_ladder) {
    if (prec < start_prec) continue;
    enclose(f, prec);
    Rounded64 rlo = round_sig_to_binary64(sig_parts_from(scratch.lo, scratch.z), mode);
    Rounded64 rhi = round_sig_to_binary64(sig_parts_from(scratch.hi, scratch.z), mode);
    if (rlo.value == rhi.value) return {rlo.value, prec, false};
  }
  throw std::runtime_error("ziv_correctly_round: undecidable at precision cap");
}

AllModes32 oracle_all_modes_f32(FuncId f, Binary32 x) {
  AllModes32 out;
  if (x.is_nan()) {
    for (auto& v : out.value) v = quiet(x);
    return out;
  }
  Binary64 wide = Binary64::from_double(static_cast<double>(x.to_float()));
  Shortcut s = shortcut_eval(f, wide, /*target_f32=*/true);
  if (s.kind == Shortcut::Kind::direct) {
    for (int m = 0; m < 4; ++m)
      out.value[m] = convert_f64_to_f32(s.direct, static_cast<RoundingMode>(m));
    return out;
  }
  if (s.kind == Shortcut::Kind::parts) {
    for (int m = 0; m < 4; ++m) {
      Rounded32 r = round_sig_to_binary32(s.parts, static_cast<RoundingMode>(m));
      out.value[m] = r.value;
      out.exact = s.value_exact && !r.inexact;
    }
    return out;
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, wide.to_double(), MPFR_RNDN);
  int undecided = 0xF;
  for (int prec : ziv_ladder) {
    enclose(f, prec);
    SigParts plo = sig_parts_from(scratch.lo, scratch.z);
    SigParts phi = sig_parts_from(scratch.hi, scratch.z);
    for (int m = 0; m < 4; ++m) {
      if (!(undecided & (1 << m))) continue;
      Rounded32 rlo = round_sig_to_binary32(plo, static_cast<RoundingMode>(m));
      Rounded32 rhi = round_sig_to_binary32(phi, static_cast<RoundingMode>(m));
      if (rlo.value == rhi.value) {
        out.value[m] = rlo.value;
        undecided &= ~(1 << m);
      }
    }
    if (!undecided) return out;
  }
  throw std::runtime_error("oracle_all_modes_f32: undecidable at precision cap");
}

AllModes64 oracle_all_modes_f64(FuncId f, Binary64 x) {
  AllModes64 out;
  if (x.is_nan()) {
    for (auto& v : out.value) v = quiet(x);
    return out;
  }
  Shortcut s = shortcut_eval(f, x, /*target_f32=*/false);
  if (s.kind == Shortcut::Kind::direct) {
    for (auto& v : out.value) v = s.direct;
    return out;
  }
  if (s.kind == Shortcut::Kind::parts) {
    for (int m = 0; m < 4; ++m) {
      Rounded64 r = round_sig_to_binary64(s.parts, static_cast<RoundingMode>(m));
      out.value[m] = r.value;
      out.exact = s.value_exact && !r.inexact;
    }
    return out;
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, x.to_double(), MPFR_RNDN);
  int undecided = 0xF;
  for (int prec : ziv_ladder) {
    enclose(f, prec);
    SigParts plo = sig_parts_from(scratch.lo, scratch.z);
    SigParts phi = sig_parts_from(scratch.hi, scratch.z);
    for (int m = 0; m < 4; ++m) {
      if (!(undecided & (1 << m))) continue;
      Rounded64 rlo = round_sig_to_binary64(plo, static_cast<RoundingMode>(m));
      Rounded64 rhi = round_sig_to_binary64(phi, static_cast<RoundingMode>(m));
      if (rlo.value == rhi.value) {
        out.value[m] = rlo.value;
        undecided &= ~(1 << m);
      }
    }
    if (!undecided) return out;
  }
  throw std::runtime_error("oracle_all_modes_f64: undecidable at precision cap");
}

namespace {

// Append |v - cand| * 2^160 (cand given exactly in scratch.t) to `best`.
void consider_candidate(double& best) {
  mpfr_sub(scratch.t, scratch.v, scratch.t, MPFR_RNDN);
  mpfr_abs(scratch.t, scratch.t, MPFR_RNDN);
  mpfr_mul_2si(scratch.t, scratch.t, 160, MPFR_RNDN);
  double d = mpfr_get_d(scratch.t, MPFR_RNDU);
  best = std::min(best, d);
}

}  // namespace

BoundaryDistance boundary_distance_f32(FuncId f, Binary32 x) {
  BoundaryDistance out;
  if (x.is_nan() || x.is_inf()) {
    out.domain = false;
    return out;
  }
  double xd = static_cast<double>(x.to_float());
  if (f != FuncId::exp2 && xd <= 0.0) {
    out.domain = false;
    return out;
  }
  Binary64 wide = Binary64::from_double(xd);
  Shortcut s = shortcut_eval(f, wide, /*target_f32=*/true);
  if (s.kind == Shortcut::Kind::parts && s.value_exact) {
    out.exact = true;
    return out;
  }
  if (s.kind != Shortcut::Kind::none) {
    out.domain = false;  // saturated / special: not a hardness candidate
    return out;
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, xd, MPFR_RNDN);
  mpfr_set_prec(scratch.v, 160);
  eval_into(scratch.v, f, scratch.x);
  Rounded32 rn = round_sig_to_binary32(sig_parts_from(scratch.v, scratch.z),
                                       RoundingMode::NearestEven);
  if (!rn.inexact) {
    out.exact = true;
    return out;
  }
  // Boundaries: the nearest representable (rn) and the midpoints flanking
  // it. Neighbours via the ordered mapping; at the format's edge the
  // midpoint against the virtual 2^128 covers the overflow threshold.
  double best = std::numeric_limits<double>::infinity();
  mpfr_set_prec(scratch.t, 224);
  mpfr_set_d(scratch.t, static_cast<double>(rn.value.to_float()), MPFR_RNDN);
  consider_candidate(best);
  std::int64_t o = ordered32(rn.value);
  for (int dir = -1; dir <= 1; dir += 2) {
    Binary32 nb = from_ordered32(o + dir);
    double nbv;
    if (nb.is_inf() || nb.is_nan()) {
      nbv = std::copysign(0x1p128, dir > 0 ? 1.0 : -1.0);
    } else {
      nbv = static_cast<double>(nb.to_float());
    }
    mpfr_set_prec(scratch.t, 224);
    mpfr_set_d(scratch.t, static_cast<double>(rn.value.to_float()), MPFR_RNDN);
    mpfr_add_d(scratch.t, scratch.t, nbv, MPFR_RNDN);
    mpfr_div_2si(scratch.t, scratch.t, 1, MPFR_RNDN);
    consider_candidate(best);
  }
  out.scaled_distance = best;
  return out;
}

BoundaryDistance boundary_distance_f64(FuncId f, Binary64 x) {
  BoundaryDistance out;
  if (x.is_nan() || x.is_inf()) {
    out.domain = false;
    return out;
  }
  double xd = x.to_double();
  if (f != FuncId::exp2 && xd <= 0.0) {
    out.domain = false;
    return out;
  }
  Shortcut s = shortcut_eval(f, x, /*target_f32=*/false);
  if (s.kind == Shortcut::Kind::parts && s.value_exact) {
    out.exact = true;
    return out;
  }
  if (s.kind != Shortcut::Kind::none) {
    out.domain = false;
    return out;
  }

  scratch.ensure();
  mpfr_set_d(scratch.x, xd, MPFR_RNDN);
  mpfr_set_prec(scratch.v, 160);
  eval_into(scratch.v, f, scratch.x);
  Rounded64 rn = round_sig_to_binary64(sig_parts_from(scratch.v, scratch.z),
                                       RoundingMode::NearestEven);
  if (!rn.inexact) {
    out.exact = true;
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  double rd = rn.value.to_double();
  mpfr_set_prec(scratch.t, 288);
  mpfr_set_d(scratch.t, rd, MPFR_RNDN);
  consider_candidate(best);
  for (int dir = -1; dir <= 1; dir += 2) {
    // Step along the value order.
    Binary64 nb;
    if (rn.value.is_zero()) {
      nb = Binary64((dir > 0) == (rn.value.sign() == 0) ? 0x1ull
                                                        : 0x8000000000000001ull);
    } else {
      bool away = (dir > 0) == (rn.value.sign() == 0);
      nb = Binary64(rn.value.bits + (away ? 1 : -1));
    }
    mpfr_set_prec(scratch.t, 288);
    mpfr_set_d(scratch.t, rd, MPFR_RNDN);
    if (nb.is_inf() || nb.is_nan()) {
      MPFR_DECL_INIT(big, 64);
      mpfr_set_ui_2exp(big, 1, 1024, MPFR_RNDN);
      if (dir < 0) mpfr_neg(big, big, MPFR_RNDN);
      mpfr_add(scratch.t, scratch.t, big, MPFR_RNDN);
    } else {
      mpfr_add_d(scratch.t, scratch.t, nb.to_double(), MPFR_RNDN);
    }
    mpfr_div_2si(scratch.t, scratch.t, 1, MPFR_RNDN);
    consider_candidate(best);
  }
  out.scaled_distance = best;
  return out;
}

std::vector<HardCase> hardest_case_search(FuncId f, std::uint32_t lo_bits,
                                          std::uint32_t hi_bits, std::size_t cap) {
  std::vector<HardCase> cases;
  for (std::uint64_t b = lo_bits; b <= hi_bits; ++b) {
    Binary32 x(static_cast<std::uint32_t>(b));
    BoundaryDistance d = boundary_distance_f32(f, x);
    if (!d.domain || d.exact) continue;
    cases.push_back({x.bits, d.scaled_distance});
  }
  std::stable_sort(cases.begin(), cases.end(),
                   [](const HardCase& a, const HardCase& b) {
                     return a.scaled_distance < b.scaled_distance;
                   });
  if (cap && cases.size() > cap) cases.resize(cap);
  return cases;
}

}  // namespace crvec
