#pragma once
// Table and coefficient generation from the multiprecision oracle:
// weighted minimax fits (iterated exchange on Chebyshev nodes, all
// arithmetic at 256+ bits), binary64 coefficient refinement, and dense-grid
// certification of every emitted bound. Generation is single-threaded and
// bit-reproducible; any budget violation aborts emission.

#include <stdexcept>
#include <string>
#include <vector>

#include "crvec/tables.hpp"

namespace crvec {

// Fit budgets (exact-arithmetic reconstruction quality), relative except
// log2f which is absolute on the reconstructed sum.
inline constexpr double budget_fit_exp2f = 0x1p-57;
inline constexpr double budget_fit_log2f = 0x1p-50;
inline constexpr double budget_fit_exp2d = 0x1p-66;
inline constexpr double budget_fit_logd = 0x1p-66;

struct FitResult {
  std::vector<double> coefficients;
  double certified_bound = 0.0;  // 2x dense-grid supremum
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_bound(achieved) {}
  double achieved_bound;
};

// Weighted minimax fit of the named target over [a, b] by a polynomial of
// the given degree (power basis; some targets pin low-order terms and fit
// only the tail). Throws FitError naming the achieved bound if it exceeds
// `budget` (budget <= 0 disables the check).
//
// target_id / weight_rule:
//   "const-half"      constant 0.5, weight "absolute" (self-test target)
//   "exp2m1-over-r"   (2^R - 1)/R,  weight "exp2-recon": |R|/2^R
//   "log2-recon"      (log2(1 + R/1.5) - R)/R, weight "r-abs": |R|
//   "exp2d-tail"      (2^R - 1 - R*ln2dd)/R^2, weight "r2-rel": R^2/2^R
//   "logd-tail"       (log1p(r) - r + r^2/2)/r^3, weight "r3-rel": r^3/log1p(r)
// The weighted supremum equals the reconstruction error each kernel sees.
FitResult fit_minimax(const std::string& target_id, double a, double b,
                      int degree, const std::string& weight_rule, double budget);

struct GenResult {
  AllTables tables;
  std::string report;  // human-readable certification summary
};

// Generate every table and bound from the oracle. Deterministic.
GenResult gen_all_tables();

// Regenerate and compare against a checked-in artifact (and the embedded
// copy). Lists the first differing records on mismatch.
struct VerifyTablesResult {
  bool pass = true;
  std::vector<std::string> diffs;
};
VerifyTablesResult verify_tables(const std::string& artifact_path);

// C++ initializer for the embedded copy (src/tables_data.inc).
std::string emit_tables_header(const AllTables& t);

}  // namespace crvec
