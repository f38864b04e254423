#include "crvec/tables.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "crvec/fpbits.hpp"

namespace crvec {

double logd_bin_midpoint(int i) {
  // Bins come from the top 7 mantissa-field bits of mx in [0.75, 1.5):
  // i in [0,64)  -> mx in [1 + i/128, 1 + (i+1)/128), midpoint (257+2i)/256
  // i in [64,128)-> mx in [(128+i)/256, (129+i)/256), midpoint (257+2i)/512
  double num = static_cast<double>(257 + 2 * i);
  return i < 64 ? num * 0x1p-8 : num * 0x1p-9;
}

double logd_rcp_from_index(int i) {
  double q = 1.0 / logd_bin_midpoint(i);
  // Round to 7 significant bits: ties cannot occur (an odd multiple of a
  // power of two never divides 2^16 evenly), so bit rounding is safe.
  std::uint64_t b = Binary64::from_double(q).bits;
  b = (b + 0x0000200000000000ull) & 0xFFFFC00000000000ull;
  return Binary64(b).to_double();
}

std::uint64_t fnv1a64(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

void put(std::ostringstream& os, const char* name, int idx, double v) {
  char buf[128];
  if (idx >= 0)
    std::snprintf(buf, sizeof buf, "%s.%d %016llX\n", name, idx,
                  static_cast<unsigned long long>(Binary64::from_double(v).bits));
  else
    std::snprintf(buf, sizeof buf, "%s %016llX\n", name,
                  static_cast<unsigned long long>(Binary64::from_double(v).bits));
  os << buf;
}

void put_pair(std::ostringstream& os, const char* name, int idx, double hi, double lo) {
  char buf[160];
  if (idx >= 0)
    std::snprintf(buf, sizeof buf, "%s.%d %016llX %016llX\n", name, idx,
                  static_cast<unsigned long long>(Binary64::from_double(hi).bits),
                  static_cast<unsigned long long>(Binary64::from_double(lo).bits));
  else
    std::snprintf(buf, sizeof buf, "%s %016llX %016llX\n", name,
                  static_cast<unsigned long long>(Binary64::from_double(hi).bits),
                  static_cast<unsigned long long>(Binary64::from_double(lo).bits));
  os << buf;
}

void put_u64(std::ostringstream& os, const char* name, int idx, std::uint64_t v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s.%d %016llX\n", name, idx,
                static_cast<unsigned long long>(v));
  os << buf;
}

}  // namespace

std::string serialize_tables(const AllTables& t) {
  std::ostringstream os;
  for (int i = 0; i < 8; ++i) put(os, "exp2f.T", i, t.exp2f.T[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 7; ++i) put(os, "exp2f.c", i, t.exp2f.c[static_cast<std::size_t>(i)]);
  for (int d = 0; d < 10; ++d)
    for (int j = 0; j < 8; ++j) {
      char name[32];
      std::snprintf(name, sizeof name, "log2f.c.%d", d);
      put(os, name, j, t.log2f.c[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)]);
    }
  for (int i = 0; i < 16; ++i)
    put_pair(os, "exp2d.T1", i, t.exp2d.T1_hi[static_cast<std::size_t>(i)],
             t.exp2d.T1_lo[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 16; ++i)
    put_pair(os, "exp2d.T2", i, t.exp2d.T2_hi[static_cast<std::size_t>(i)],
             t.exp2d.T2_lo[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 16; ++i)
    put_pair(os, "exp2d.T3", i, t.exp2d.T3_hi[static_cast<std::size_t>(i)],
             t.exp2d.T3_lo[static_cast<std::size_t>(i)]);
  put_pair(os, "exp2d.ln2", -1, t.exp2d.ln2.hi, t.exp2d.ln2.lo);
  for (int i = 0; i < 4; ++i) put(os, "exp2d.c", i + 2, t.exp2d.c[static_cast<std::size_t>(i)]);
  for (int i = 0; i < 128; ++i)
    put_u64(os, "logd.L", i, static_cast<std::uint64_t>(t.logd.L[static_cast<std::size_t>(i)]));
  for (int i = 0; i < 128; ++i) put(os, "logd.rcp", i, t.logd.rcp[static_cast<std::size_t>(i)]);
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "logd.degree %d\n", t.logd.tail_degree);
    os << buf;
  }
  for (int i = 0; i <= t.logd.tail_degree - 3; ++i)
    put(os, "logd.c", i + 3, t.logd.c[static_cast<std::size_t>(i)]);
  put_pair(os, "logd.ln2", -1, t.logd.ln2.hi, t.logd.ln2.lo);
  put(os, "meta.fit.exp2f", -1, t.eps.fit_exp2f);
  put(os, "meta.fit.log2f", -1, t.eps.fit_log2f);
  put(os, "meta.fit.exp2d", -1, t.eps.fit_exp2d);
  put(os, "meta.fit.logd", -1, t.eps.fit_logd);
  put(os, "meta.eps.exp2d", -1, t.eps.eps_exp2d);
  put(os, "meta.eps.logd", -1, t.eps.eps_logd);
  put(os, "meta.quant.logd", -1, t.eps.quant_logd);

  std::string payload = os.str();
  char head[96];
  std::snprintf(head, sizeof head, "# crvec-tables v1 fnv1a64=%016llX\n",
                static_cast<unsigned long long>(fnv1a64(payload)));
  return std::string(head) + payload;
}

namespace {

double hex_to_double(const std::string& s) {
  std::uint64_t b = std::stoull(s, nullptr, 16);
  return Binary64(b).to_double();
}

}  // namespace

AllTables parse_tables(std::istream& in) {
  AllTables t;
  std::string line;
  bool have_hash = false;
  std::uint64_t want_hash = 0;
  std::ostringstream payload;
  std::vector<std::pair<std::string, std::vector<std::string>>> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("fnv1a64=");
      if (pos != std::string::npos) {
        want_hash = std::stoull(line.substr(pos + 8), nullptr, 16);
        have_hash = true;
      }
      continue;
    }
    payload << line << '\n';
    std::istringstream ls(line);
    std::string key, tok;
    ls >> key;
    std::vector<std::string> vals;
    while (ls >> tok) vals.push_back(tok);
    records.emplace_back(key, std::move(vals));
  }
  if (have_hash && fnv1a64(payload.str()) != want_hash)
    throw std::runtime_error("table artifact content hash mismatch");

  auto index_of = [](const std::string& key) {
    auto dot = key.rfind('.');
    return std::stoi(key.substr(dot + 1));
  };
  for (auto& [key, vals] : records) {
    if (vals.empty()) throw std::runtime_error("malformed table record: " + key);
    if (key.rfind("exp2f.T.", 0) == 0) {
      t.exp2f.T[static_cast<std::size_t>(index_of(key))] = hex_to_double(vals[0]);
    } else if (key.rfind("exp2f.c.", 0) == 0) {
      t.exp2f.c[static_cast<std::size_t>(index_of(key))] = hex_to_double(vals[0]);
    } else if (key.rfind("log2f.c.", 0) == 0) {
      auto d1 = key.find('.', 8);
      int d = std::stoi(key.substr(8, d1 - 8));
      int j = std::stoi(key.substr(d1 + 1));
      t.log2f.c[static_cast<std::size_t>(d)][static_cast<std::size_t>(j)] = hex_to_double(vals[0]);
    } else if (key.rfind("exp2d.T1.", 0) == 0) {
      auto i = static_cast<std::size_t>(index_of(key));
      t.exp2d.T1_hi[i] = hex_to_double(vals.at(0));
      t.exp2d.T1_lo[i] = hex_to_double(vals.at(1));
    } else if (key.rfind("exp2d.T2.", 0) == 0) {
      auto i = static_cast<std::size_t>(index_of(key));
      t.exp2d.T2_hi[i] = hex_to_double(vals.at(0));
      t.exp2d.T2_lo[i] = hex_to_double(vals.at(1));
    } else if (key.rfind("exp2d.T3.", 0) == 0) {
      auto i = static_cast<std::size_t>(index_of(key));
      t.exp2d.T3_hi[i] = hex_to_double(vals.at(0));
      t.exp2d.T3_lo[i] = hex_to_double(vals.at(1));
    } else if (key == "exp2d.ln2") {
      t.exp2d.ln2 = DD{hex_to_double(vals.at(0)), hex_to_double(vals.at(1))};
    } else if (key.rfind("exp2d.c.", 0) == 0) {
      t.exp2d.c[static_cast<std::size_t>(index_of(key) - 2)] = hex_to_double(vals[0]);
    } else if (key.rfind("logd.L.", 0) == 0) {
      t.logd.L[static_cast<std::size_t>(index_of(key))] =
          static_cast<std::int64_t>(std::stoull(vals[0], nullptr, 16));
    } else if (key.rfind("logd.rcp.", 0) == 0) {
      t.logd.rcp[static_cast<std::size_t>(index_of(key))] = hex_to_double(vals[0]);
    } else if (key == "logd.degree") {
      t.logd.tail_degree = std::stoi(vals[0]);
    } else if (key.rfind("logd.c.", 0) == 0) {
      t.logd.c[static_cast<std::size_t>(index_of(key) - 3)] = hex_to_double(vals[0]);
    } else if (key == "logd.ln2") {
      t.logd.ln2 = DD{hex_to_double(vals.at(0)), hex_to_double(vals.at(1))};
    } else if (key == "meta.fit.exp2f") {
      t.eps.fit_exp2f = hex_to_double(vals[0]);
    } else if (key == "meta.fit.log2f") {
      t.eps.fit_log2f = hex_to_double(vals[0]);
    } else if (key == "meta.fit.exp2d") {
      t.eps.fit_exp2d = hex_to_double(vals[0]);
    } else if (key == "meta.fit.logd") {
      t.eps.fit_logd = hex_to_double(vals[0]);
    } else if (key == "meta.eps.exp2d") {
      t.eps.eps_exp2d = hex_to_double(vals[0]);
    } else if (key == "meta.eps.logd") {
      t.eps.eps_logd = hex_to_double(vals[0]);
    } else if (key == "meta.quant.logd") {
      t.eps.quant_logd = hex_to_double(vals[0]);
    } else {
      throw std::runtime_error("unknown table record: " + key);
    }
  }
  return t;
}

AllTables load_tables_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table artifact: " + path);
  return parse_tables(in);
}

std::size_t table_bytes_exp2f() { return (8 + 7) * sizeof(double); }
std::size_t table_bytes_log2f() { return 10 * 8 * sizeof(double); }
std::size_t table_bytes_exp2d() { return 6 * 16 * sizeof(double) + 2 * sizeof(double) + 4 * sizeof(double); }
std::size_t table_bytes_logd() { return 128 * sizeof(std::int64_t) + 8 * sizeof(double) + 2 * sizeof(double); }

const AllTables& builtin_tables() {
  static const AllTables t = [] {
    AllTables v;
#include "tables_data.inc"
    return v;
  }();
  return t;
}

}  // namespace crvec
