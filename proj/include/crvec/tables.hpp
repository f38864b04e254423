#pragma once
// Generated lookup tables and polynomial coefficients, their text artifact
// serialization, and the certified error bounds the kernels' rounding tests
// rely on. All values are produced by the generator (coeffgen) from the
// multiprecision oracle and checked in; the embedded copy and the data file
// must stay bit-identical (verify_tables / `crvec gen-tables --check`).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "crvec/dd.hpp"

namespace crvec {

// exp2f: T[j] = RN64(2^(j/8)); c = degree-6 polynomial for (2^R - 1)/R on
// |R| <= 2^-4, evaluated c[6] down to c[0].
struct Exp2fTables {
  std::array<double, 8> T{};
  std::array<double, 7> c{};
};

// log2f: 8 sub-intervals x degree-9 polynomials for (log2(mx) - R)/R with
// R = 1.5*(mx - 1). Stored per-degree so each coefficient is one 8-entry
// permute: c[d][j] is the degree-d coefficient of sub-interval j.
struct Log2fTables {
  std::array<std::array<double, 8>, 10> c{};
};

// exp2: three 16-entry double-double tables T1[i]=2^(i/16), T2[i]=2^(i/256),
// T3[i]=2^(i/4096); 2^R on |R| <= 2^-13 as 1 + R*ln2 + R^2*(c2 + c3 R + ...).
struct Exp2dTables {
  std::array<double, 16> T1_hi{}, T1_lo{};
  std::array<double, 16> T2_hi{}, T2_lo{};
  std::array<double, 16> T3_hi{}, T3_lo{};
  DD ln2{};
  std::array<double, 4> c{};  // c2..c5
};

// log: 128-entry table of L[i] = round(-log(rcp_i) * 2^62) in a signed
// 64-bit word; rcp_i is 1/midpoint(bin i) rounded to 7 significant bits and
// is derived arithmetically from the index (rcp values are emitted to the
// artifact for checking only). log1p(r) = r - r^2/2 + r^3*(c3 + c4 r + ...).
struct LogdTable {
  std::array<std::int64_t, 128> L{};
  std::array<double, 128> rcp{};
  std::array<double, 8> c{};  // c3..c(3+degree-3); unused high entries zero
  int tail_degree = 0;        // highest power with a nonzero coefficient
  DD ln2{};
};

// Certified bounds. eps_* feed the binary64 rounding tests (relative, from
// the real evaluation pipeline on a dense grid, doubled); fit_* are the
// exact-arithmetic data-quality bounds the generation budgets gate on.
// quant_logd bounds |L[i]*2^-62 + log(rcp_i)| (absolute), zero when rcp = 1.
struct CertifiedBounds {
  double fit_exp2f = 0, fit_log2f = 0, fit_exp2d = 0, fit_logd = 0;
  double eps_exp2d = 0, eps_logd = 0;
  double quant_logd = 0;
};

struct AllTables {
  Exp2fTables exp2f;
  Log2fTables log2f;
  Exp2dTables exp2d;
  LogdTable logd;
  CertifiedBounds eps;
};

// The checked-in generated data.
const AllTables& builtin_tables();

// Bin midpoint and 7-bit reciprocal for log's mantissa bin i in [0, 128);
// shared between the kernel and the generator so they cannot diverge.
double logd_bin_midpoint(int i);
double logd_rcp_from_index(int i);

// Text artifact: `<table>.<field>.<index> <hex64> [<hex64>]` records with a
// header carrying an FNV-1a 64 content hash.
std::string serialize_tables(const AllTables& t);
AllTables parse_tables(std::istream& in);          // throws std::runtime_error
AllTables load_tables_file(const std::string& path);
std::uint64_t fnv1a64(const std::string& payload);

// Lookup-table byte sizes as reported by the bench tables.
std::size_t table_bytes_exp2f();
std::size_t table_bytes_log2f();
std::size_t table_bytes_exp2d();
std::size_t table_bytes_logd();

}  // namespace crvec
