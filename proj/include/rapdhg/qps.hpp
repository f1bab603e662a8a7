#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rapdhg/problem.hpp"

namespace rapdhg {

/// QPS: MPS extended with a quadratic objective section, as used by the
/// Maros-Meszaros set. Free (whitespace-delimited) field format; fixed-column
/// files tokenize identically. The objective is
///
///   1/2 x'Qx + c'x + offset
///
/// where QUADOBJ entries are coefficients of Q itself with one triangle
/// listed and mirrored on load, and QMATRIX lists the full Q. (OSQP and
/// CPLEX use different QUADOBJ conventions; this is the Maros-Meszaros one.)
/// An RHS entry on the objective row r gives offset = -r. Default variable
/// bounds are 0 <= x < inf. Lines beginning with '*' are comments.
class QpsParseError : public std::runtime_error {
 public:
  QpsParseError(int line, const std::string& message)
      : std::runtime_error("qps parse error at line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace qps_detail {

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

inline double parse_value(const std::string& tok, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw QpsParseError(line, "expected a numeric value, got '" + tok + "'");
  }
}

}  // namespace qps_detail

inline RawProblem parse_qps(std::istream& in) {
  using qps_detail::parse_value;
  using qps_detail::tokenize;
  using qps_detail::upper;

  enum class Section {
    kNone, kObjsense, kRows, kColumns, kRhs, kRanges, kBounds, kQuadobj, kQmatrix, kDone
  };

  RawProblem raw;
  std::map<std::string, int> row_index;   // constraint rows only
  std::map<std::string, int> col_index;
  std::string obj_row_name;
  bool have_obj_row = false;
  bool seen_name = false;
  std::vector<RowType> row_types;
  std::vector<Triplet> a_entries, q_entries;
  Vec rhs, range_vals;
  Vec lower, upper_b;
  std::vector<bool> lower_set;
  bool qmatrix = false;

  Section section = Section::kNone;
  std::string line;
  int lineno = 0;

  auto col_of = [&](const std::string& name, int ln) {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw QpsParseError(ln, "undeclared column '" + name + "'");
    return it->second;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '*') continue;

    const bool is_header = !std::isspace(static_cast<unsigned char>(line[0]));
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (is_header) {
      const std::string key = upper(toks[0]);
      if (key == "NAME") {
        if (seen_name) throw QpsParseError(lineno, "duplicate NAME section");
        seen_name = true;
        if (toks.size() > 1) raw.name = toks[1];
        continue;
      }
      if (key == "OBJSENSE") {
        section = Section::kObjsense;
        if (toks.size() > 1 && upper(toks[1]) != "MIN" && upper(toks[1]) != "MINIMIZE")
          throw QpsParseError(lineno, "only minimization objectives are supported");
        continue;
      }
      if (key == "ROWS") { section = Section::kRows; continue; }
      if (key == "COLUMNS") { section = Section::kColumns; continue; }
      if (key == "RHS") { section = Section::kRhs; continue; }
      if (key == "RANGES") { section = Section::kRanges; continue; }
      if (key == "BOUNDS") { section = Section::kBounds; continue; }
      if (key == "QUADOBJ") { section = Section::kQuadobj; qmatrix = false; continue; }
      if (key == "QMATRIX") { section = Section::kQmatrix; qmatrix = true; continue; }
      if (key == "ENDATA") { section = Section::kDone; break; }
      throw QpsParseError(lineno, "unknown section '" + toks[0] + "'");
    }

    switch (section) {
      case Section::kObjsense: {
        const std::string s = upper(toks[0]);
        if (s != "MIN" && s != "MINIMIZE")
          throw QpsParseError(lineno, "only minimization objectives are supported");
        break;
      }
      case Section::kRows: {
        if (toks.size() != 2) throw QpsParseError(lineno, "ROWS line needs a type and a name");
        const std::string type = upper(toks[0]);
        const std::string& name = toks[1];
        if (type == "N") {
          if (have_obj_row)
            throw QpsParseError(lineno, "multiple objective (N) rows are not supported");
          obj_row_name = name;
          have_obj_row = true;
          break;
        }
        RowType rt;
        if (type == "E") rt = RowType::kEq;
        else if (type == "L") rt = RowType::kLe;
        else if (type == "G") rt = RowType::kGe;
        else throw QpsParseError(lineno, "unknown row type '" + toks[0] + "'");
        if (row_index.count(name) || (have_obj_row && name == obj_row_name))
          throw QpsParseError(lineno, "duplicate row '" + name + "'");
        row_index[name] = static_cast<int>(row_types.size());
        raw.row_names.push_back(name);
        row_types.push_back(rt);
        break;
      }
      case Section::kColumns: {
        if (toks.size() >= 3 && upper(toks[1]) == "'MARKER'")
          throw QpsParseError(lineno, "integer markers are not supported");
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw QpsParseError(lineno, "COLUMNS line needs column, then row/value pairs");
        const std::string& cname = toks[0];
        if (!col_index.count(cname)) {
          col_index[cname] = static_cast<int>(raw.var_names.size());
          raw.var_names.push_back(cname);
        }
        const int c = col_index[cname];
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          const std::string& rname = toks[i];
          const double v = parse_value(toks[i + 1], lineno);
          if (have_obj_row && rname == obj_row_name) {
            if (static_cast<int>(raw.c.size()) <= c) raw.c.resize(c + 1, 0.0);
            raw.c[c] += v;
          } else {
            auto it = row_index.find(rname);
            if (it == row_index.end())
              throw QpsParseError(lineno, "undeclared row '" + rname + "'");
            a_entries.push_back({it->second, c, v});
          }
        }
        break;
      }
      case Section::kRhs: {
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw QpsParseError(lineno, "RHS line needs a set name, then row/value pairs");
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          const std::string& rname = toks[i];
          const double v = parse_value(toks[i + 1], lineno);
          if (have_obj_row && rname == obj_row_name) {
            raw.obj_offset = -v;
            continue;
          }
          auto it = row_index.find(rname);
          if (it == row_index.end()) throw QpsParseError(lineno, "undeclared row '" + rname + "'");
          if (static_cast<int>(rhs.size()) <= it->second) rhs.resize(row_types.size(), 0.0);
          rhs[it->second] = v;
        }
        break;
      }
      case Section::kRanges: {
        if (toks.size() < 3 || toks.size() % 2 == 0)
          throw QpsParseError(lineno, "RANGES line needs a set name, then row/value pairs");
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          const std::string& rname = toks[i];
          const double v = parse_value(toks[i + 1], lineno);
          auto it = row_index.find(rname);
          if (it == row_index.end()) throw QpsParseError(lineno, "undeclared row '" + rname + "'");
          if (range_vals.empty()) range_vals.assign(row_types.size(), std::nan(""));
          range_vals[it->second] = v;
        }
        break;
      }
      case Section::kBounds: {
        if (toks.size() < 3) throw QpsParseError(lineno, "BOUNDS line needs type, set, column");
        const std::string btype = upper(toks[0]);
        const int c = col_of(toks[2], lineno);
        if (lower.size() < raw.var_names.size()) {
          lower.resize(raw.var_names.size(), 0.0);
          upper_b.resize(raw.var_names.size(), kInf);
          lower_set.resize(raw.var_names.size(), false);
        }
        auto need_value = [&]() {
          if (toks.size() < 4) throw QpsParseError(lineno, "bound type " + btype + " needs a value");
          return parse_value(toks[3], lineno);
        };
        if (btype == "UP") {
          const double v = need_value();
          upper_b[c] = v;
          // Classic MPS quirk: a negative upper bound on a variable whose
          // lower bound is still the default 0 frees the lower bound.
          if (v < 0.0 && !lower_set[c]) lower[c] = -kInf;
        } else if (btype == "LO") {
          lower[c] = need_value();
          lower_set[c] = true;
        } else if (btype == "FX") {
          const double v = need_value();
          lower[c] = upper_b[c] = v;
          lower_set[c] = true;
        } else if (btype == "FR") {
          lower[c] = -kInf;
          upper_b[c] = kInf;
          lower_set[c] = true;
        } else if (btype == "MI") {
          lower[c] = -kInf;
          lower_set[c] = true;
        } else if (btype == "PL") {
          upper_b[c] = kInf;
        } else {
          throw QpsParseError(lineno, "unsupported bound type '" + toks[0] + "'");
        }
        break;
      }
      case Section::kQuadobj:
      case Section::kQmatrix: {
        if (toks.size() != 3)
          throw QpsParseError(lineno, "quadratic section line needs two columns and a value");
        const int c1 = col_of(toks[0], lineno);
        const int c2 = col_of(toks[1], lineno);
        const double v = parse_value(toks[2], lineno);
        q_entries.push_back({c1, c2, v});
        if (!qmatrix && c1 != c2) q_entries.push_back({c2, c1, v});
        break;
      }
      case Section::kNone:
        throw QpsParseError(lineno, "data before any section header");
      case Section::kDone:
        break;
    }
  }
  if (section != Section::kDone) throw QpsParseError(lineno, "missing ENDATA");
  if (!have_obj_row) throw QpsParseError(lineno, "no objective (N) row declared");

  const int n = static_cast<int>(raw.var_names.size());
  const int m = static_cast<int>(row_types.size());
  raw.c.resize(n, 0.0);
  rhs.resize(m, 0.0);
  if (range_vals.empty()) range_vals.assign(m, std::nan(""));
  if (lower.size() < static_cast<std::size_t>(n)) {
    lower.resize(n, 0.0);
    upper_b.resize(n, kInf);
  }
  raw.row_types = std::move(row_types);
  raw.rhs = std::move(rhs);
  raw.range = std::move(range_vals);
  raw.lower = std::move(lower);
  raw.upper = std::move(upper_b);
  raw.a = SparseMatrix(m, n, std::move(a_entries));
  raw.q = SparseMatrix(n, n, std::move(q_entries));
  return raw;
}

inline RawProblem parse_qps_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw QpsParseError(0, "cannot open '" + path + "'");
  return parse_qps(in);
}

namespace qps_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace qps_detail

/// Writes a canonical problem: inequality rows as L, equality rows as E, all
/// variables explicitly free (canonical form has no bounds), Q as a QUADOBJ
/// lower triangle. parse_qps + canonicalize of the output reproduces the
/// problem exactly.
inline void write_qps(const QuadraticProgram& p, std::ostream& out) {
  using qps_detail::fmt;
  const int n = p.num_vars();
  auto var_name = [&](int j) {
    if (j < static_cast<int>(p.var_names.size()) && !p.var_names[j].empty()) return p.var_names[j];
    char buf[16];
    std::snprintf(buf, sizeof(buf), "X%07d", j + 1);
    return std::string(buf);
  };
  auto ineq_name = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "R%07d", i + 1);
    return std::string(buf);
  };
  auto eq_name = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "E%07d", i + 1);
    return std::string(buf);
  };

  out << "NAME          " << (p.name.empty() ? "QP" : p.name) << "\n";
  out << "ROWS\n";
  out << " N  OBJ\n";
  for (int i = 0; i < p.num_ineq(); ++i) out << " L  " << ineq_name(i) << "\n";
  for (int i = 0; i < p.num_eq(); ++i) out << " E  " << eq_name(i) << "\n";

  // Column-major emission: every entry of each variable in one run.
  std::vector<std::vector<std::pair<std::string, double>>> col_entries(n);
  for (int j = 0; j < n; ++j)
    if (p.c[j] != 0.0) col_entries[j].push_back({"OBJ", p.c[j]});
  p.a_ineq.for_each([&](int r, int c, double v) { col_entries[c].push_back({ineq_name(r), v}); });
  p.a_eq.for_each([&](int r, int c, double v) { col_entries[c].push_back({eq_name(r), v}); });

  out << "COLUMNS\n";
  for (int j = 0; j < n; ++j) {
    if (col_entries[j].empty()) {
      // Keep otherwise-unreferenced variables declared.
      out << "    " << var_name(j) << "  OBJ  0.0\n";
      continue;
    }
    for (const auto& [row, v] : col_entries[j])
      out << "    " << var_name(j) << "  " << row << "  " << fmt(v) << "\n";
  }

  out << "RHS\n";
  if (p.obj_offset != 0.0) out << "    RHS  OBJ  " << fmt(-p.obj_offset) << "\n";
  for (int i = 0; i < p.num_ineq(); ++i)
    if (p.b_ineq[i] != 0.0) out << "    RHS  " << ineq_name(i) << "  " << fmt(p.b_ineq[i]) << "\n";
  for (int i = 0; i < p.num_eq(); ++i)
    if (p.b_eq[i] != 0.0) out << "    RHS  " << eq_name(i) << "  " << fmt(p.b_eq[i]) << "\n";

  out << "BOUNDS\n";
  for (int j = 0; j < n; ++j) out << " FR BND  " << var_name(j) << "\n";

  if (!p.q.empty()) {
    out << "QUADOBJ\n";
    p.q.for_each([&](int r, int c, double v) {
      if (r <= c) out << "    " << var_name(r) << "  " << var_name(c) << "  " << fmt(v) << "\n";
    });
  }
  out << "ENDATA\n";
}

inline std::string write_qps_string(const QuadraticProgram& p) {
  std::ostringstream os;
  write_qps(p, os);
  return os.str();
}

}  // namespace rapdhg
