#include "conicadmm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace conicadmm {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void parse_fail(int lineno, const std::string& what) {
  throw ParseError("line " + std::to_string(lineno) + ": " + what);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_double_token(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size() && std::isfinite(out);
}

bool parse_int_token(const std::string& tok, long long& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtoll(begin, &end, 10);
  return end == begin + tok.size();
}

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Largest-magnitude-preserving preimage of a packed coefficient under the
// sqrt(2) off-diagonal scaling: returns v with v * sqrt2 == t whenever such a
// double exists (always the case for packed vectors built from matrix data),
// the nearest double otherwise.
double matrix_value_from_packed(double t, bool diagonal) {
  if (diagonal || t == 0.0) return t;
  const double v = t / kSqrt2;
  if (v * kSqrt2 == t) return v;
  // The preimage, when it exists, lies within two ulps of the quotient.
  double up = v, down = v;
  for (int step = 0; step < 2; ++step) {
    up = std::nextafter(up, kInf);
    if (up * kSqrt2 == t) return up;
    down = std::nextafter(down, -kInf);
    if (down * kSqrt2 == t) return down;
  }
  return v;
}

// Reads lines, stripping '#' comments, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next line with any content after comment stripping; false at EOF.
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++lineno_;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      out = trimmed(raw);
      if (!out.empty()) return true;
    }
    return false;
  }

  int lineno() const { return lineno_; }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// SDPA sparse format

namespace {

// The header lines of SDPA files may use commas and brackets as separators.
std::string soften_sdpa_delims(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
  }
  return s;
}

struct SdpaLineReader {
  std::istream& in;
  int lineno = 0;

  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string t = trimmed(raw);
      if (t.empty() || t[0] == '*' || t[0] == '"') continue;
      out = t;
      return true;
    }
    return false;
  }
};

long long sdpa_single_int(SdpaLineReader& r, const std::string& what) {
  std::string line;
  if (!r.next(line)) throw ParseError("unexpected end of input: expected " + what);
  const auto toks = tokenize(soften_sdpa_delims(line));
  long long v = 0;
  if (toks.size() != 1 || !parse_int_token(toks[0], v)) {
    parse_fail(r.lineno, "expected " + what);
  }
  return v;
}

}  // namespace

ConicProblem read_sdpa(std::istream& in) {
  SdpaLineReader reader{in};

  const long long m = sdpa_single_int(reader, "the number of constraint matrices");
  if (m < 0) parse_fail(reader.lineno, "the number of constraint matrices is negative");
  const long long nblocks = sdpa_single_int(reader, "the block count");
  if (nblocks != 1) {
    parse_fail(reader.lineno,
               "multi-block files are not supported; expected a single positive "
               "semidefinite block");
  }
  const long long n = sdpa_single_int(reader, "the block size");
  if (n < 0) {
    parse_fail(reader.lineno,
               "diagonal blocks are not supported; expected a single positive "
               "semidefinite block");
  }
  if (n == 0) parse_fail(reader.lineno, "block size must be positive");

  Vector b = Vector::Zero(m);
  if (m > 0) {
    std::string line;
    if (!reader.next(line)) {
      throw ParseError("unexpected end of input: expected " + std::to_string(m) +
                       " right-hand side values");
    }
    const auto toks = tokenize(soften_sdpa_delims(line));
    if (static_cast<long long>(toks.size()) != m) {
      parse_fail(reader.lineno, "expected " + std::to_string(m) +
                                    " right-hand side values, got " +
                                    std::to_string(toks.size()));
    }
    for (long long k = 0; k < m; ++k) {
      if (!parse_double_token(toks[k], b[k])) {
        parse_fail(reader.lineno, "malformed right-hand side value '" + toks[k] + "'");
      }
    }
  }

  ConicProblem p(static_cast<int>(n), static_cast<int>(m));
  Matrix C = Matrix::Zero(n, n);
  std::set<std::tuple<long long, long long, long long>> seen;

  std::string line;
  while (reader.next(line)) {
    const auto toks = tokenize(line);
    if (toks.size() != 5) {
      parse_fail(reader.lineno, "expected an entry 'matno blkno i j value'");
    }
    long long matno = 0, blkno = 0, i = 0, j = 0;
    double v = 0.0;
    if (!parse_int_token(toks[0], matno) || !parse_int_token(toks[1], blkno) ||
        !parse_int_token(toks[2], i) || !parse_int_token(toks[3], j) ||
        !parse_double_token(toks[4], v)) {
      parse_fail(reader.lineno, "malformed entry 'matno blkno i j value'");
    }
    if (matno < 0 || matno > m) {
      parse_fail(reader.lineno, "matrix index " + std::to_string(matno) +
                                    " out of range [0, " + std::to_string(m) + "]");
    }
    if (blkno != 1) parse_fail(reader.lineno, "block index out of range: only block 1 exists");
    if (i < 1 || j < 1 || i > n || j > n) {
      parse_fail(reader.lineno, "entry index out of range for block size " + std::to_string(n));
    }
    if (i > j) parse_fail(reader.lineno, "entries must satisfy i <= j");
    if (!seen.emplace(matno, i, j).second) {
      parse_fail(reader.lineno, "duplicate entry for matrix " + std::to_string(matno) +
                                    " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (matno == 0) {
      C(i - 1, j - 1) = v;
      C(j - 1, i - 1) = v;
    } else {
      p.eq.add_entry(static_cast<int>(matno) - 1, static_cast<int>(i) - 1,
                     static_cast<int>(j) - 1, v);
    }
  }

  p.cost = svec(C);
  p.b_eq = b;
  p.eq.finalize();
  p.ineq.finalize();
  p.validate();
  return p;
}

namespace {

void apply_pattern_annotations(ConicProblem& p, std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::set<std::pair<long long, long long>> seen;
  while (reader.next(line)) {
    const auto toks = tokenize(line);
    if (toks.size() != 3) parse_fail(reader.lineno(), "expected a pattern entry 'i j KIND'");
    long long i = 0, j = 0;
    if (!parse_int_token(toks[0], i) || !parse_int_token(toks[1], j)) {
      parse_fail(reader.lineno(), "malformed pattern entry 'i j KIND'");
    }
    if (i < 1 || j < 1 || i > p.n || j > p.n) {
      parse_fail(reader.lineno(), "pattern index out of range for order " + std::to_string(p.n));
    }
    if (i > j) parse_fail(reader.lineno(), "pattern entries must satisfy i <= j");
    if (!seen.emplace(i, j).second) {
      parse_fail(reader.lineno(), "duplicate pattern entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
    EntryKind kind;
    try {
      kind = entry_kind_from_token(toks[2]);
    } catch (const ParseError& e) {
      parse_fail(reader.lineno(), e.what());
    }
    p.pattern.set_kind(static_cast<int>(i) - 1, static_cast<int>(j) - 1, kind);
  }
}

}  // namespace

ConicProblem read_sdpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  ConicProblem p = read_sdpa(in);
  p.id = std::filesystem::path(path).stem().string();

  const std::string companion = path + ".pattern";
  std::ifstream pattern_in(companion);
  if (pattern_in) {
    try {
      apply_pattern_annotations(p, pattern_in);
    } catch (const ParseError& e) {
      throw ParseError("pattern annotation '" + companion + "': " + e.what());
    }
  }
  return p;
}

namespace {

struct NamedEntry {
  int i;
  int j;
  double value;
};

// Consolidates a row's triplets by coordinate in first-appearance order.
std::vector<NamedEntry> consolidated_row(const std::vector<CoeffTriplet>& triplets) {
  std::vector<NamedEntry> out;
  std::unordered_map<long long, size_t> where;
  for (const auto& t : triplets) {
    const long long key = static_cast<long long>(t.i) * (1LL << 32) + t.j;
    auto [it, fresh] = where.emplace(key, out.size());
    if (fresh) {
      out.push_back({t.i, t.j, t.value});
    } else {
      out[it->second].value += t.value;
    }
  }
  return out;
}

}  // namespace

void write_sdpa(std::ostream& out, const ConicProblem& p) {
  p.validate();
  if (p.m_ineq() > 0) {
    throw std::invalid_argument(
        "problem has inequality rows and is not representable in the "
        "single-block format; use the native format");
  }
  if (!p.pattern.all_free() || p.pattern.has_shift()) {
    throw std::invalid_argument(
        "problem carries a pattern cone or shift and is not representable in "
        "the single-block format; use the native format");
  }
  if (p.obj_sign != 1.0 || p.obj_offset != 0.0) {
    throw std::invalid_argument(
        "problem carries an objective sign or offset and is not representable "
        "in the single-block format; use the native format");
  }

  out << p.m_eq() << "\n" << 1 << "\n" << p.n << "\n";
  if (p.m_eq() > 0) {
    for (int k = 0; k < p.m_eq(); ++k) out << (k ? " " : "") << fmt(p.b_eq[k]);
    out << "\n";
  }
  for (int i = 0; i < p.n; ++i) {
    for (int j = i; j < p.n; ++j) {
      const double t = p.cost[svec_index(i, j)];
      if (t == 0.0) continue;
      out << "0 1 " << i + 1 << " " << j + 1 << " "
          << fmt(matrix_value_from_packed(t, i == j)) << "\n";
    }
  }
  for (int r = 0; r < p.m_eq(); ++r) {
    for (const auto& e : consolidated_row(p.eq.row_triplets()[r])) {
      if (e.value == 0.0) continue;
      out << r + 1 << " 1 " << e.i + 1 << " " << e.j + 1 << " " << fmt(e.value) << "\n";
    }
  }
}

void write_sdpa_file(const std::string& path, const ConicProblem& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_sdpa(out, p);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Native annotated format

namespace {

bool representable_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#' || c == ',') return false;
  }
  return true;
}

struct MetaData {
  long long n = -1;
  long long m_eq = -1;
  long long m_ineq = -1;
  double obj_sign = 1.0;
  double obj_offset = 0.0;
  std::string id;
};

}  // namespace

ConicProblem read_native(std::istream& in) {
  LineReader reader(in);
  std::string line;

  if (!reader.next(line) || line != "[meta]") {
    throw ParseError("line " + std::to_string(std::max(reader.lineno(), 1)) +
                     ": expected the file to start with [meta]");
  }

  MetaData meta;
  bool in_meta = true;
  std::string pending_section;
  while (in_meta && reader.next(line)) {
    if (line.front() == '[') {
      pending_section = line;
      in_meta = false;
      break;
    }
    const auto toks = tokenize(line);
    long long iv = 0;
    double dv = 0.0;
    if (toks[0] == "n" && toks.size() == 2 && parse_int_token(toks[1], iv)) {
      meta.n = iv;
    } else if (toks[0] == "m_eq" && toks.size() == 2 && parse_int_token(toks[1], iv)) {
      meta.m_eq = iv;
    } else if (toks[0] == "m_ineq" && toks.size() == 2 && parse_int_token(toks[1], iv)) {
      meta.m_ineq = iv;
    } else if (toks[0] == "obj_sign" && toks.size() == 2 && parse_double_token(toks[1], dv)) {
      meta.obj_sign = dv;
    } else if (toks[0] == "offset" && toks.size() == 2 && parse_double_token(toks[1], dv)) {
      meta.obj_offset = dv;
    } else if (toks[0] == "id" && toks.size() == 2) {
      meta.id = toks[1];
    } else {
      parse_fail(reader.lineno(), "malformed [meta] line '" + line + "'");
    }
  }
  if (meta.n < 1) throw ParseError("[meta] must declare n >= 1");
  if (meta.m_eq < 0) throw ParseError("[meta] must declare m_eq >= 0");
  if (meta.m_ineq < 0) throw ParseError("[meta] must declare m_ineq >= 0");

  const int n = static_cast<int>(meta.n);
  ConicProblem p(n, static_cast<int>(meta.m_eq), static_cast<int>(meta.m_ineq));
  p.id = meta.id;
  p.obj_sign = meta.obj_sign;
  p.obj_offset = meta.obj_offset;
  p.b_eq = Vector::Zero(p.m_eq());
  p.b_ineq = Vector::Zero(p.m_ineq());

  Matrix C = Matrix::Zero(n, n);
  Matrix shift = Matrix::Zero(n, n);
  PolyhedralPattern pattern(n, EntryKind::Free);
  bool any_shift = false;

  std::set<std::string> seen_sections{"[meta]"};
  std::set<std::pair<int, int>> cost_seen, pattern_seen, shift_seen;
  std::vector<bool> eq_rhs_seen(p.m_eq(), false), ineq_rhs_seen(p.m_ineq(), false);

  enum class Section { Cost, Eq, Ineq, Pattern, Shift };
  Section section = Section::Cost;
  bool have_section = false;

  auto open_section = [&](const std::string& header) {
    if (header == "[meta]") parse_fail(reader.lineno(), "section [meta] duplicated");
    if (!seen_sections.insert(header).second) {
      parse_fail(reader.lineno(), "section " + header + " duplicated");
    }
    if (header == "[cost]") section = Section::Cost;
    else if (header == "[eq]") section = Section::Eq;
    else if (header == "[ineq]") section = Section::Ineq;
    else if (header == "[pattern]") section = Section::Pattern;
    else if (header == "[shift]") section = Section::Shift;
    else parse_fail(reader.lineno(), "unknown section " + header);
    have_section = true;
  };

  auto parse_index = [&](const std::string& tok, long long hi, const std::string& what) {
    long long v = 0;
    if (!parse_int_token(tok, v) || v < 1 || v > hi) {
      parse_fail(reader.lineno(), what + " out of range [1, " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
  };

  auto constraint_line = [&](LinearConstraintMap& map, Vector& rhs,
                             std::vector<bool>& rhs_seen, const std::vector<std::string>& toks) {
    const int r = parse_index(toks[0], map.rows(), "constraint row");
    if (toks.size() == 2) {
      double v = 0.0;
      if (!parse_double_token(toks[1], v)) {
        parse_fail(reader.lineno(), "malformed right-hand side '" + toks[1] + "'");
      }
      if (rhs_seen[r - 1]) {
        parse_fail(reader.lineno(), "duplicate right-hand side for row " + std::to_string(r));
      }
      rhs_seen[r - 1] = true;
      rhs[r - 1] = v;
      return;
    }
    if (toks.size() != 4) {
      parse_fail(reader.lineno(), "expected 'row value' or 'row i j value'");
    }
    const int i = parse_index(toks[1], n, "entry index");
    const int j = parse_index(toks[2], n, "entry index");
    double v = 0.0;
    if (!parse_double_token(toks[3], v)) {
      parse_fail(reader.lineno(), "malformed coefficient '" + toks[3] + "'");
    }
    map.add_entry(r - 1, i - 1, j - 1, v);
  };

  if (!pending_section.empty()) open_section(pending_section);

  while (reader.next(line)) {
    if (line.front() == '[') {
      open_section(line);
      continue;
    }
    if (!have_section) parse_fail(reader.lineno(), "expected a section header");
    const auto toks = tokenize(line);
    switch (section) {
      case Section::Cost: {
        if (toks.size() != 3) parse_fail(reader.lineno(), "expected a cost entry 'i j value'");
        const int i = parse_index(toks[0], n, "entry index");
        const int j = parse_index(toks[1], n, "entry index");
        if (i > j) parse_fail(reader.lineno(), "cost entries must satisfy i <= j");
        double v = 0.0;
        if (!parse_double_token(toks[2], v)) {
          parse_fail(reader.lineno(), "malformed cost value '" + toks[2] + "'");
        }
        if (!cost_seen.emplace(i, j).second) {
          parse_fail(reader.lineno(), "duplicate cost entry (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");
        }
        C(i - 1, j - 1) = v;
        C(j - 1, i - 1) = v;
        break;
      }
      case Section::Eq:
        constraint_line(p.eq, p.b_eq, eq_rhs_seen, toks);
        break;
      case Section::Ineq:
        constraint_line(p.ineq, p.b_ineq, ineq_rhs_seen, toks);
        break;
      case Section::Pattern: {
        if (toks.size() != 3) parse_fail(reader.lineno(), "expected a pattern entry 'i j KIND'");
        const int i = parse_index(toks[0], n, "entry index");
        const int j = parse_index(toks[1], n, "entry index");
        if (i > j) parse_fail(reader.lineno(), "pattern entries must satisfy i <= j");
        if (!pattern_seen.emplace(i, j).second) {
          parse_fail(reader.lineno(), "duplicate pattern entry (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");
        }
        EntryKind kind;
        try {
          kind = entry_kind_from_token(toks[2]);
        } catch (const ParseError& e) {
          parse_fail(reader.lineno(), e.what());
        }
        pattern.set_kind(i - 1, j - 1, kind);
        break;
      }
      case Section::Shift: {
        if (toks.size() != 3) parse_fail(reader.lineno(), "expected a shift entry 'i j value'");
        const int i = parse_index(toks[0], n, "entry index");
        const int j = parse_index(toks[1], n, "entry index");
        if (i > j) parse_fail(reader.lineno(), "shift entries must satisfy i <= j");
        double v = 0.0;
        if (!parse_double_token(toks[2], v)) {
          parse_fail(reader.lineno(), "malformed shift value '" + toks[2] + "'");
        }
        if (!shift_seen.emplace(i, j).second) {
          parse_fail(reader.lineno(), "duplicate shift entry (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");
        }
        shift(i - 1, j - 1) = v;
        shift(j - 1, i - 1) = v;
        any_shift = true;
        break;
      }
    }
  }

  if (p.m_eq() > 0 && !seen_sections.count("[eq]")) {
    throw ParseError("missing section [eq] (m_eq = " + std::to_string(p.m_eq()) + ")");
  }
  if (p.m_ineq() > 0 && !seen_sections.count("[ineq]")) {
    throw ParseError("missing section [ineq] (m_ineq = " + std::to_string(p.m_ineq()) + ")");
  }

  p.cost = svec(C);
  if (any_shift) pattern.set_shift(shift);
  p.pattern = pattern;
  p.eq.finalize();
  p.ineq.finalize();
  p.validate();
  return p;
}

ConicProblem read_native_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  return read_native(in);
}

void write_native(std::ostream& out, const ConicProblem& p) {
  p.validate();
  if (!p.id.empty() && !representable_id(p.id)) {
    throw std::invalid_argument("problem id '" + p.id +
                                "' contains characters the format cannot carry");
  }

  out << "[meta]\n";
  out << "n " << p.n << "\n";
  out << "m_eq " << p.m_eq() << "\n";
  out << "m_ineq " << p.m_ineq() << "\n";
  out << "obj_sign " << fmt(p.obj_sign) << "\n";
  out << "offset " << fmt(p.obj_offset) << "\n";
  if (!p.id.empty()) out << "id " << p.id << "\n";

  bool any_cost = false;
  for (int i = 0; i < p.packed_dim() && !any_cost; ++i) any_cost = p.cost[i] != 0.0;
  if (any_cost) {
    out << "[cost]\n";
    for (int i = 0; i < p.n; ++i) {
      for (int j = i; j < p.n; ++j) {
        const double t = p.cost[svec_index(i, j)];
        if (t == 0.0) continue;
        out << i + 1 << " " << j + 1 << " " << fmt(matrix_value_from_packed(t, i == j))
            << "\n";
      }
    }
  }

  auto write_constraints = [&](const char* header, const LinearConstraintMap& map,
                               const Vector& rhs) {
    if (map.rows() == 0) return;
    out << header << "\n";
    for (int r = 0; r < map.rows(); ++r) {
      out << r + 1 << " " << fmt(rhs[r]) << "\n";
      for (const auto& t : map.row_triplets()[r]) {
        out << r + 1 << " " << t.i + 1 << " " << t.j + 1 << " " << fmt(t.value) << "\n";
      }
    }
  };
  write_constraints("[eq]", p.eq, p.b_eq);
  write_constraints("[ineq]", p.ineq, p.b_ineq);

  if (!p.pattern.all_free()) {
    out << "[pattern]\n";
    for (int i = 0; i < p.n; ++i) {
      for (int j = i; j < p.n; ++j) {
        const EntryKind k = p.pattern.kind(i, j);
        if (k == EntryKind::Free) continue;
        out << i + 1 << " " << j + 1 << " " << entry_kind_token(k) << "\n";
      }
    }
  }

  if (p.pattern.has_shift()) {
    const Matrix& M = p.pattern.shift();
    bool any = false;
    for (int i = 0; i < p.n && !any; ++i) {
      for (int j = i; j < p.n && !any; ++j) any = M(i, j) != 0.0;
    }
    if (any) {
      out << "[shift]\n";
      for (int i = 0; i < p.n; ++i) {
        for (int j = i; j < p.n; ++j) {
          if (M(i, j) == 0.0) continue;
          out << i + 1 << " " << j + 1 << " " << fmt(M(i, j)) << "\n";
        }
      }
    }
  }
}

void write_native_file(const std::string& path, const ConicProblem& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_native(out, p);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Run records

namespace {

constexpr const char* kRunRecordHeader =
    "problem,solver,n,m_eq,m_ineq,tol,iterations,status,eta,eta_p,eta_d,eta_k,"
    "eta_ks,eta_pc,eta_pcs,eta_c1,eta_c2,eta_i,eta_is,gap,primal_obj,dual_obj,"
    "setup_seconds,solve_seconds";
constexpr int kRunRecordFields = 24;

RunStatus run_status_from_name(const std::string& name) {
  if (name == "Converged") return RunStatus::Converged;
  if (name == "MaxIters") return RunStatus::MaxIters;
  if (name == "Stalled") return RunStatus::Stalled;
  throw ParseError("unknown run status '" + name + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_csv_text(const std::string& value, const char* what) {
  if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " '" + value +
                                "' must not contain commas or newlines");
  }
}

double csv_double(const std::string& tok, const char* what) {
  double v = 0.0;
  if (!parse_double_token(tok, v)) {
    throw ParseError(std::string("malformed ") + what + " value '" + tok + "'");
  }
  return v;
}

int csv_int(const std::string& tok, const char* what) {
  long long v = 0;
  if (!parse_int_token(tok, v)) {
    throw ParseError(std::string("malformed ") + what + " value '" + tok + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

RunRecord make_run_record(const ConicProblem& p, SolverId id,
                          const SplittingConfig& cfg, const SolveResult& result) {
  RunRecord r;
  r.problem_id = p.id;
  r.solver = solver_id_name(id);
  r.n = p.n;
  r.m_eq = p.m_eq();
  r.m_ineq = p.m_ineq();
  r.tol = cfg.tol;
  r.iterations = result.log.iterations;
  r.status = result.log.status;
  const ResidualReport& e = result.residuals;
  r.eta = e.eta;
  r.eta_p = e.eta_p;
  r.eta_d = e.eta_d;
  r.eta_k = e.eta_k;
  r.eta_ks = e.eta_ks;
  r.eta_pc = e.eta_pc;
  r.eta_pcs = e.eta_pcs;
  r.eta_c1 = e.eta_c1;
  r.eta_c2 = e.eta_c2;
  r.eta_i = e.eta_i;
  r.eta_is = e.eta_is;
  r.gap = e.gap;
  r.primal_objective = p.reported_objective(e.primal_objective);
  r.dual_objective = p.reported_objective(e.dual_objective);
  r.setup_seconds = result.log.setup_seconds;
  r.solve_seconds = result.log.solve_seconds;
  return r;
}

std::string run_record_header() { return kRunRecordHeader; }

std::string run_record_row(const RunRecord& r) {
  check_csv_text(r.problem_id, "problem id");
  check_csv_text(r.solver, "solver id");
  std::ostringstream out;
  out << r.problem_id << ',' << r.solver << ',' << r.n << ',' << r.m_eq << ','
      << r.m_ineq << ',' << fmt(r.tol) << ',' << r.iterations << ','
      << run_status_name(r.status) << ',' << fmt(r.eta) << ',' << fmt(r.eta_p) << ','
      << fmt(r.eta_d) << ',' << fmt(r.eta_k) << ',' << fmt(r.eta_ks) << ','
      << fmt(r.eta_pc) << ',' << fmt(r.eta_pcs) << ',' << fmt(r.eta_c1) << ','
      << fmt(r.eta_c2) << ',' << (r.eta_i ? fmt(*r.eta_i) : "") << ','
      << (r.eta_is ? fmt(*r.eta_is) : "") << ',' << fmt(r.gap) << ','
      << fmt(r.primal_objective) << ',' << fmt(r.dual_objective) << ','
      << fmt(r.setup_seconds) << ',' << fmt(r.solve_seconds);
  return out.str();
}

RunRecord parse_run_record_row(const std::string& line) {
  const auto f = split_csv(line);
  if (static_cast<int>(f.size()) != kRunRecordFields) {
    throw ParseError("expected " + std::to_string(kRunRecordFields) + " fields, got " +
                     std::to_string(f.size()));
  }
  RunRecord r;
  r.problem_id = f[0];
  r.solver = f[1];
  r.n = csv_int(f[2], "n");
  r.m_eq = csv_int(f[3], "m_eq");
  r.m_ineq = csv_int(f[4], "m_ineq");
  r.tol = csv_double(f[5], "tol");
  r.iterations = csv_int(f[6], "iterations");
  r.status = run_status_from_name(f[7]);
  r.eta = csv_double(f[8], "eta");
  r.eta_p = csv_double(f[9], "eta_p");
  r.eta_d = csv_double(f[10], "eta_d");
  r.eta_k = csv_double(f[11], "eta_k");
  r.eta_ks = csv_double(f[12], "eta_ks");
  r.eta_pc = csv_double(f[13], "eta_pc");
  r.eta_pcs = csv_double(f[14], "eta_pcs");
  r.eta_c1 = csv_double(f[15], "eta_c1");
  r.eta_c2 = csv_double(f[16], "eta_c2");
  if (!f[17].empty()) r.eta_i = csv_double(f[17], "eta_i");
  if (!f[18].empty()) r.eta_is = csv_double(f[18], "eta_is");
  r.gap = csv_double(f[19], "gap");
  r.primal_objective = csv_double(f[20], "primal_obj");
  r.dual_objective = csv_double(f[21], "dual_obj");
  r.setup_seconds = csv_double(f[22], "setup_seconds");
  r.solve_seconds = csv_double(f[23], "solve_seconds");
  return r;
}

std::vector<RunRecord> read_run_records(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty record file: expected a header");
  ++lineno;
  if (trimmed(line) != kRunRecordHeader) {
    throw ParseError("line 1: unexpected record header");
  }
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    try {
      out.push_back(parse_run_record_row(t));
    } catch (const ParseError& e) {
      parse_fail(lineno, e.what());
    }
  }
  return out;
}

std::vector<RunRecord> read_run_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open record file '" + path + "'");
  return read_run_records(in);
}

void write_run_records(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRunRecordHeader << "\n";
  for (const auto& r : records) out << run_record_row(r) << "\n";
}

void append_run_record_file(const std::string& path, const RunRecord& r) {
  const bool fresh =
      !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (fresh) out << kRunRecordHeader << "\n";
  out << run_record_row(r) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string format_hms(double seconds) {
  if (!(seconds >= 0.0)) {
    throw std::invalid_argument("format_hms: duration must be nonnegative");
  }
  const long long total = std::llround(seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld:%02lld:%02lld", total / 3600,
                (total / 60) % 60, total % 60);
  return buf;
}

// ---------------------------------------------------------------------------
// Performance profiles

std::optional<ProfileMetric> parse_profile_metric(const std::string& name) {
  if (name == "time") return ProfileMetric::Time;
  if (name == "iterations") return ProfileMetric::Iterations;
  return std::nullopt;
}

const char* profile_metric_name(ProfileMetric m) {
  return m == ProfileMetric::Time ? "time" : "iterations";
}

std::vector<double> profile_grid() {
  std::vector<double> x(200);
  for (int i = 0; i < 200; ++i) x[i] = std::pow(32.0, i / 199.0);
  return x;
}

ProfileTable emit_performance_profile(const std::vector<RunRecord>& records,
                                      ProfileMetric metric,
                                      const std::vector<double>& grid) {
  if (records.empty()) throw std::invalid_argument("no records to profile");
  if (grid.empty()) throw std::invalid_argument("empty profile grid");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1.0 || (i && grid[i] < grid[i - 1])) {
      throw std::invalid_argument("profile grid must be nondecreasing with x >= 1");
    }
  }

  std::vector<std::string> solvers, problems;
  std::unordered_map<std::string, int> solver_idx, problem_idx;
  for (const auto& r : records) {
    if (solver_idx.emplace(r.solver, static_cast<int>(solvers.size())).second) {
      solvers.push_back(r.solver);
    }
    if (problem_idx.emplace(r.problem_id, static_cast<int>(problems.size())).second) {
      problems.push_back(r.problem_id);
    }
  }
  const int S = static_cast<int>(solvers.size());
  const int P = static_cast<int>(problems.size());

  const double unset = -1.0;
  std::vector<std::vector<double>> m(S, std::vector<double>(P, unset));
  for (const auto& r : records) {
    const int s = solver_idx[r.solver];
    const int p = problem_idx[r.problem_id];
    if (m[s][p] != unset) {
      throw std::invalid_argument("duplicate record for problem '" + r.problem_id +
                                  "' and solver '" + r.solver + "'");
    }
    if (r.status != RunStatus::Converged) {
      m[s][p] = kInf;
    } else {
      m[s][p] = metric == ProfileMetric::Time ? r.solve_seconds
                                              : static_cast<double>(r.iterations);
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int p = 0; p < P; ++p) {
      if (m[s][p] == unset) {
        throw std::invalid_argument("missing record for problem '" + problems[p] +
                                    "' and solver '" + solvers[s] + "'");
      }
    }
  }

  std::vector<double> best(P, kInf);
  for (int p = 0; p < P; ++p) {
    for (int s = 0; s < S; ++s) best[p] = std::min(best[p], m[s][p]);
  }

  ProfileTable table;
  table.metric = metric;
  table.solvers = solvers;
  table.x = grid;
  table.y.assign(S, std::vector<double>(grid.size(), 0.0));
  for (int s = 0; s < S; ++s) {
    for (size_t i = 0; i < grid.size(); ++i) {
      int count = 0;
      for (int p = 0; p < P; ++p) {
        if (std::isfinite(m[s][p]) && m[s][p] <= grid[i] * best[p]) ++count;
      }
      table.y[s][i] = static_cast<double>(count) / P;
    }
  }
  return table;
}

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
  out << "x";
  for (const auto& s : table.solvers) {
    check_csv_text(s, "solver id");
    out << ',' << s;
  }
  out << "\n";
  for (size_t i = 0; i < table.x.size(); ++i) {
    out << fmt(table.x[i]);
    for (size_t s = 0; s < table.y.size(); ++s) out << ',' << fmt(table.y[s][i]);
    out << "\n";
  }
}

}  // namespace conicadmm
