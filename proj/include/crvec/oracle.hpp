#pragma once
// Arbitrary-precision reference evaluation of exp2 / log / log2 and a
// Ziv-style correct rounder: evaluate with increasing precision until the
// error interval around the approximation contains no rounding boundary of
// the target format, which proves the rounding decision. Exactly
// representable results (exp2 of integers, log2 of powers of two, log 1)
// are recognized algebraically before any iteration.
//
// The multiprecision arithmetic itself is backed by MPFR; the rounding
// decisions, interval tests and boundary-distance machinery are implemented
// here on top of exact integer extraction, sharing the same rounding engine
// the rest of the library uses.

#include <cstdint>
#include <vector>

#include "crvec/fpbits.hpp"

namespace crvec {

enum class FuncId { exp2, log, log2 };

const char* func_name(FuncId f) noexcept;

// Escalation ladder; decided_at_precision reports 0 for results decided by
// the special/exact shortcuts that never touch the ladder.
inline constexpr int ziv_ladder[] = {96, 160, 256, 512, 1024, 2048, 4096};

struct ZivResult32 {
  Binary32 value;
  int decided_at_precision = 0;
  bool exact = false;
};

struct ZivResult64 {
  Binary64 value;
  int decided_at_precision = 0;
  bool exact = false;
};

namespace oracle {

// High-precision evaluation handle. Value semantics over an mpfr number;
// normalized leading bit, explicit precision, relative error of eval_hp
// below 2^-(prec-2).
class BigFixed {
 public:
  BigFixed();
  explicit BigFixed(int precision);
  BigFixed(const BigFixed&);
  BigFixed(BigFixed&&) noexcept;
  BigFixed& operator=(const BigFixed&);
  BigFixed& operator=(BigFixed&&) noexcept;
  ~BigFixed();

  int precision() const;
  bool negative() const;
  bool zero() const;
  std::int64_t exponent() const;  // value in [2^(e-1), 2^e) for nonzero
  double to_double() const;       // nearest

  void* raw() const { return rep_; }  // mpfr_ptr, for the implementation

 private:
  void* rep_;
};

// f(x) at `prec` bits, round-to-nearest at that precision. Domain errors
// (log of a non-positive x, non-finite x) throw std::domain_error.
BigFixed eval_hp(FuncId f, double x, int prec);

}  // namespace oracle

ZivResult32 ziv_correctly_round_f32(FuncId f, Binary32 x, RoundingMode mode,
                                    int start_prec = 96);
ZivResult64 ziv_correctly_round_f64(FuncId f, Binary64 x, RoundingMode mode,
                                    int start_prec = 96);

// One evaluation shared between all four rounding modes; the workhorse of
// the exhaustive sweeps.
struct AllModes32 {
  Binary32 value[4];  // indexed by RoundingMode
  bool exact = false;
};
struct AllModes64 {
  Binary64 value[4];
  bool exact = false;
};
AllModes32 oracle_all_modes_f32(FuncId f, Binary32 x);
AllModes64 oracle_all_modes_f64(FuncId f, Binary64 x);

// Distance from f(x) to the nearest rounding boundary (representable values
// and round-to-nearest midpoints both count), measured in units of 2^-prec
// at prec = 160. `exact` marks results that are representable, which are
// excluded from hardness ranking.
struct BoundaryDistance {
  double scaled_distance = 0.0;  // |f(x) - boundary| * 2^160
  bool exact = false;
  bool domain = true;  // false when x is outside the function's domain
};
BoundaryDistance boundary_distance_f32(FuncId f, Binary32 x);
BoundaryDistance boundary_distance_f64(FuncId f, Binary64 x);

struct HardCase {
  std::uint32_t input_bits;
  double scaled_distance;
};

// Every non-exact in-domain input in [lo_bits, hi_bits] (pattern order),
// ranked ascending by boundary distance; ties keep input order. cap limits
// the returned list, 0 = unlimited.
std::vector<HardCase> hardest_case_search(FuncId f, std::uint32_t lo_bits,
                                          std::uint32_t hi_bits,
                                          std::size_t cap = 0);

}  // namespace crvec
