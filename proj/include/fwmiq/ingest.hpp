// SPDX-License-Identifier: Apache-2.0
#pragma once

// Instance readers and the canonical writer.
//
// Canonical format, one directive per line, '#' starts a comment:
//   NAME <string>
//   SENSE MIN|MAX
//   NVARS <n>
//   VAR <idx> <C|I|B> <lb|-inf> <ub|+inf>
//   OBJ QUAD <i> <j> <coef>      adds coef * x_i * x_j (no implicit 1/2)
//   OBJ LIN <i> <coef>
//   OBJ CONST <c>
//   CON <id> QUAD <i> <j> <coef>
//   CON <id> LIN <i> <coef>
//   CON <id> SENSE <LE|GE|EQ> <rhs>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fwmiq/model.hpp"

namespace fwmiq {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, int line) {
  if (tok == "inf" || tok == "+inf" || tok == "Inf" || tok == "+Inf" || tok == "infinity") return kInf;
  if (tok == "-inf" || tok == "-Inf" || tok == "-infinity") return -kInf;
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line, "expected a number, got '" + s + "'");
  return v;
}

inline long parse_int(std::string_view tok, int line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
  return v;
}

inline std::string format_double(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void negate_objective(Problem& p) {
  for (auto& t : p.objective_terms) t.coef = -t.coef;
  for (auto& d : p.objective_linear) d = -d;
  p.objective_constant = -p.objective_constant;
}

}  // namespace detail

inline Problem parse_canonical(std::string_view text) {
  Problem p;
  bool have_n = false;
  std::vector<bool> declared;
  struct PendingCon {
    std::vector<QuadTerm> terms;
    std::vector<LinTerm> linear;
    std::optional<Sense> sense;
    double rhs = 0.0;
    int line = 0;
  };
  std::vector<std::string> con_order;
  std::map<std::string, PendingCon> cons;
  std::vector<QuadTerm> obj_terms;

  auto check_index = [&](long idx, int line) {
    if (!have_n) throw ParseError(line, "NVARS must precede variable references");
    if (idx < 0 || idx >= p.n) throw ParseError(line, "variable index " + std::to_string(idx) + " out of range");
    return static_cast<int>(idx);
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = detail::split_ws(line);
    if (tok.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    auto need = [&](std::size_t count) {
      if (tok.size() != count)
        throw ParseError(line_no, "directive " + std::string(tok[0]) + " expects " + std::to_string(count - 1) +
                                      " arguments");
    };
    const std::string_view kw = tok[0];
    if (kw == "NAME") {
      if (tok.size() < 2) throw ParseError(line_no, "NAME expects an argument");
      p.name = std::string(tok[1]);
    } else if (kw == "SENSE") {
      need(2);
      if (tok[1] == "MIN")
        p.maximize = false;
      else if (tok[1] == "MAX")
        p.maximize = true;
      else
        throw ParseError(line_no, "SENSE must be MIN or MAX");
    } else if (kw == "NVARS") {
      need(2);
      if (have_n) throw ParseError(line_no, "duplicate NVARS");
      const long n = detail::parse_int(tok[1], line_no);
      if (n < 0) throw ParseError(line_no, "NVARS must be nonnegative");
      p.resize(static_cast<int>(n));
      declared.assign(n, false);
      have_n = true;
    } else if (kw == "VAR") {
      need(5);
      const int idx = check_index(detail::parse_int(tok[1], line_no), line_no);
      if (declared[idx]) throw ParseError(line_no, "duplicate declaration of variable " + std::to_string(idx));
      declared[idx] = true;
      VarKind kind;
      if (tok[2] == "C")
        kind = VarKind::Continuous;
      else if (tok[2] == "I")
        kind = VarKind::Integer;
      else if (tok[2] == "B")
        kind = VarKind::Binary;
      else
        throw ParseError(line_no, "variable kind must be C, I or B");
      const double lo = detail::parse_double(tok[3], line_no);
      const double hi = detail::parse_double(tok[4], line_no);
      if (kind == VarKind::Binary && (lo < 0.0 || hi > 1.0))
        throw ParseError(line_no, "binary variable bounds must lie within [0,1]");
      p.kinds[idx] = kind;
      p.lb[idx] = lo;
      p.ub[idx] = hi;
    } else if (kw == "OBJ") {
      if (tok.size() < 2) throw ParseError(line_no, "OBJ expects a subdirective");
      if (tok[1] == "QUAD") {
        need(5);
        const int i = check_index(detail::parse_int(tok[2], line_no), line_no);
        const int j = check_index(detail::parse_int(tok[3], line_no), line_no);
        obj_terms.push_back({i, j, detail::parse_double(tok[4], line_no)});
      } else if (tok[1] == "LIN") {
        need(4);
        const int i = check_index(detail::parse_int(tok[2], line_no), line_no);
        p.objective_linear[i] += detail::parse_double(tok[3], line_no);
      } else if (tok[1] == "CONST") {
        need(3);
        p.objective_constant += detail::parse_double(tok[2], line_no);
      } else {
        throw ParseError(line_no, "unknown OBJ subdirective '" + std::string(tok[1]) + "'");
      }
    } else if (kw == "CON") {
      if (tok.size() < 3) throw ParseError(line_no, "CON expects an id and a subdirective");
      std::string id(tok[1]);
      auto [it, inserted] = cons.try_emplace(id);
      if (inserted) {
        con_order.push_back(id);
        it->second.line = line_no;
      }
      auto& c = it->second;
      if (tok[2] == "QUAD") {
        need(6);
        const int i = check_index(detail::parse_int(tok[3], line_no), line_no);
        const int j = check_index(detail::parse_int(tok[4], line_no), line_no);
        c.terms.push_back({i, j, detail::parse_double(tok[5], line_no)});
      } else if (tok[2] == "LIN") {
        need(5);
        const int i = check_index(detail::parse_int(tok[3], line_no), line_no);
        c.linear.push_back({i, detail::parse_double(tok[4], line_no)});
      } else if (tok[2] == "SENSE") {
        need(5);
        if (c.sense) throw ParseError(line_no, "duplicate SENSE for constraint " + id);
        if (tok[3] == "LE")
          c.sense = Sense::LE;
        else if (tok[3] == "GE")
          c.sense = Sense::GE;
        else if (tok[3] == "EQ")
          c.sense = Sense::EQ;
        else
          throw ParseError(line_no, "constraint sense must be LE, GE or EQ");
        c.rhs = detail::parse_double(tok[4], line_no);
      } else {
        throw ParseError(line_no, "unknown CON subdirective '" + std::string(tok[2]) + "'");
      }
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(kw) + "'");
    }
    if (eol == text.size()) break;
  }
  if (!have_n) throw ParseError(line_no, "missing NVARS");
  for (int k = 0; k < p.n; ++k)
    if (!declared[k]) throw ParseError(line_no, "variable " + std::to_string(k) + " not declared");

  p.objective_terms = canonical_terms(std::move(obj_terms));
  for (const auto& id : con_order) {
    auto& c = cons.at(id);
    if (!c.sense) throw ParseError(c.line, "constraint " + id + " has no SENSE line");
    add_constraint(p, id, std::move(c.terms), std::move(c.linear), -c.rhs, *c.sense);
  }
  if (p.maximize) detail::negate_objective(p);
  return p;
}

/// Writes the model in canonical format, objective in its original sense.
inline std::string write_canonical(const Problem& p) {
  std::ostringstream os;
  using detail::format_double;
  if (!p.name.empty()) os << "NAME " << p.name << '\n';
  os << "SENSE " << (p.maximize ? "MAX" : "MIN") << '\n';
  os << "NVARS " << p.n << '\n';
  for (int k = 0; k < p.n; ++k) {
    const char kind = p.kinds[k] == VarKind::Binary ? 'B' : p.kinds[k] == VarKind::Integer ? 'I' : 'C';
    os << "VAR " << k << ' ' << kind << ' ' << format_double(p.lb[k]) << ' ' << format_double(p.ub[k]) << '\n';
  }
  const double sign = p.maximize ? -1.0 : 1.0;
  for (const auto& t : p.objective_terms)
    os << "OBJ QUAD " << t.i << ' ' << t.j << ' ' << format_double(sign * t.coef) << '\n';
  for (int k = 0; k < p.n; ++k)
    if (p.objective_linear[k] != 0.0) os << "OBJ LIN " << k << ' ' << format_double(sign * p.objective_linear[k]) << '\n';
  if (p.objective_constant != 0.0) os << "OBJ CONST " << format_double(sign * p.objective_constant) << '\n';
  for (std::size_t ci = 0; ci < p.constraints.size(); ++ci) {
    const auto& c = p.constraints[ci];
    const std::string id = c.name.empty() ? "c" + std::to_string(ci) : c.name;
    for (const auto& t : c.terms)
      os << "CON " << id << " QUAD " << t.i << ' ' << t.j << ' ' << format_double(t.coef) << '\n';
    for (const auto& t : c.linear) os << "CON " << id << " LIN " << t.index << ' ' << format_double(t.coef) << '\n';
    const char* sense = c.sense == Sense::EQ ? "EQ" : c.sense == Sense::GE ? "GE" : "LE";
    os << "CON " << id << " SENSE " << sense << ' ' << format_double(c.constant == 0.0 ? 0.0 : -c.constant) << '\n';
  }
  return os.str();
}

namespace detail {

// Line-oriented reader for QPLIB files: every record is one line; trailing text
// after the values and '#' comments are ignored.
class QplibReader {
 public:
  explicit QplibReader(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      auto tok = split_ws(line);
      if (tok.empty() || tok[0].starts_with('!')) continue;
      lines_.push_back({line_no, std::move(tok)});
    }
    last_line_ = line_no;
  }

  bool at_end() const { return next_ >= lines_.size(); }

  const std::vector<std::string_view>& record(std::size_t min_tokens, const char* what) {
    if (at_end()) throw ParseError(last_line_, std::string("unexpected end of file while reading ") + what);
    const auto& rec = lines_[next_++];
    current_line_ = rec.first;
    if (rec.second.size() < min_tokens)
      throw ParseError(rec.first, std::string("too few fields in ") + what);
    return rec.second;
  }

  double real(const char* what) { return parse_double(record(1, what)[0], current_line_); }
  long integer(const char* what) { return parse_int(record(1, what)[0], current_line_); }
  int line() const { return current_line_; }

 private:
  std::vector<std::pair<int, std::vector<std::string_view>>> lines_;
  std::size_t next_ = 0;
  int current_line_ = 0;
  int last_line_ = 0;
};

}  // namespace detail

/// Reads the QPLIB text format (quadratic/linear instances with continuous,
/// binary and integer variables). Objective and constraint matrices are given
/// as lower-triangular entries of Q in 0.5 x^T Q x.
inline Problem parse_qplib(std::string_view text) {
  detail::QplibReader in(text);
  Problem p;
  p.name = std::string(in.record(1, "problem name")[0]);
  const std::string code(in.record(1, "problem type")[0]);
  if (code.size() != 3) throw UnsupportedError("unsupported QPLIB problem type '" + code + "'");
  const char obj_code = code[0], var_code = code[1], con_code = code[2];
  if (std::string_view("LDCQ").find(obj_code) == std::string_view::npos ||
      std::string_view("CBMIG").find(var_code) == std::string_view::npos ||
      std::string_view("NBLCQ").find(con_code) == std::string_view::npos)
    throw UnsupportedError("unsupported QPLIB problem type '" + code + "'");

  const std::string sense(in.record(1, "objective sense")[0]);
  if (sense == "maximize")
    p.maximize = true;
  else if (sense != "minimize")
    throw ParseError(in.line(), "objective sense must be minimize or maximize");

  const long n = in.integer("number of variables");
  if (n < 0) throw ParseError(in.line(), "negative variable count");
  p.resize(static_cast<int>(n));
  const bool has_rows = con_code != 'N' && con_code != 'B';
  const long m = has_rows ? in.integer("number of constraints") : 0;
  if (m < 0) throw ParseError(in.line(), "negative constraint count");

  auto var_index = [&](std::string_view tok) {
    const long v = detail::parse_int(tok, in.line());
    if (v < 1 || v > n) throw ParseError(in.line(), "variable index out of range");
    return static_cast<int>(v - 1);
  };
  auto con_index = [&](std::string_view tok) {
    const long v = detail::parse_int(tok, in.line());
    if (v < 1 || v > m) throw ParseError(in.line(), "constraint index out of range");
    return static_cast<int>(v - 1);
  };
  // Lower-triangular entry of Q in 0.5 x^T Q x, mapped to the term convention.
  auto half_q_term = [](int r, int c, double v) {
    return r == c ? QuadTerm{r, r, 0.5 * v} : QuadTerm{std::min(r, c), std::max(r, c), v};
  };

  std::vector<QuadTerm> obj_terms;
  if (obj_code != 'L') {
    const long nnz = in.integer("objective quadratic count");
    for (long e = 0; e < nnz; ++e) {
      const auto& r = in.record(3, "objective quadratic entry");
      obj_terms.push_back(half_q_term(var_index(r[0]), var_index(r[1]), detail::parse_double(r[2], in.line())));
    }
  }
  const double b0 = in.real("default linear objective coefficient");
  std::fill(p.objective_linear.begin(), p.objective_linear.end(), b0);
  const long nb = in.integer("linear objective count");
  for (long e = 0; e < nb; ++e) {
    const auto& r = in.record(2, "linear objective entry");
    p.objective_linear[var_index(r[0])] = detail::parse_double(r[1], in.line());
  }
  p.objective_constant = in.real("objective constant");

  std::vector<std::vector<QuadTerm>> con_terms(m);
  std::vector<std::vector<LinTerm>> con_lin(m);
  if (con_code == 'Q' || con_code == 'C') {
    const long nnz = in.integer("constraint quadratic count");
    for (long e = 0; e < nnz; ++e) {
      const auto& r = in.record(4, "constraint quadratic entry");
      const int ci = con_index(r[0]);
      con_terms[ci].push_back(half_q_term(var_index(r[1]), var_index(r[2]), detail::parse_double(r[3], in.line())));
    }
  }
  if (has_rows) {
    const long nnz = in.integer("constraint linear count");
    for (long e = 0; e < nnz; ++e) {
      const auto& r = in.record(3, "constraint linear entry");
      const int ci = con_index(r[0]);
      con_lin[ci].push_back({var_index(r[1]), detail::parse_double(r[2], in.line())});
    }
  }
  const double infinity = in.real("infinity value");
  auto fix_inf = [&](double v) { return v >= infinity ? kInf : v <= -infinity ? -kInf : v; };

  std::vector<double> cl(m), cu(m);
  if (has_rows) {
    for (auto* target : {&cl, &cu}) {
      const double dflt = fix_inf(in.real("default constraint bound"));
      std::fill(target->begin(), target->end(), dflt);
      const long cnt = in.integer("constraint bound count");
      for (long e = 0; e < cnt; ++e) {
        const auto& r = in.record(2, "constraint bound entry");
        (*target)[con_index(r[0])] = fix_inf(detail::parse_double(r[1], in.line()));
      }
    }
  }

  if (var_code == 'B') {
    std::fill(p.lb.begin(), p.lb.end(), 0.0);
    std::fill(p.ub.begin(), p.ub.end(), 1.0);
    std::fill(p.kinds.begin(), p.kinds.end(), VarKind::Binary);
  } else {
    for (auto* target : {&p.lb, &p.ub}) {
      const double dflt = fix_inf(in.real("default variable bound"));
      std::fill(target->begin(), target->end(), dflt);
      const long cnt = in.integer("variable bound count");
      for (long e = 0; e < cnt; ++e) {
        const auto& r = in.record(2, "variable bound entry");
        (*target)[var_index(r[0])] = fix_inf(detail::parse_double(r[1], in.line()));
      }
    }
    auto kind_of = [&](long code_value) {
      switch (code_value) {
        case 0: return VarKind::Continuous;
        case 1: return VarKind::Integer;
        case 2: return VarKind::Binary;
        default: throw ParseError(in.line(), "unknown variable type code");
      }
    };
    if (var_code == 'I') {
      std::fill(p.kinds.begin(), p.kinds.end(), VarKind::Integer);
    } else if (var_code == 'M' || var_code == 'G') {
      const VarKind dflt = kind_of(static_cast<long>(in.real("default variable type")));
      std::fill(p.kinds.begin(), p.kinds.end(), dflt);
      const long cnt = in.integer("variable type count");
      for (long e = 0; e < cnt; ++e) {
        const auto& r = in.record(2, "variable type entry");
        p.kinds[var_index(r[0])] = kind_of(static_cast<long>(detail::parse_double(r[1], in.line())));
      }
    }
    for (int k = 0; k < p.n; ++k) {
      if (p.kinds[k] == VarKind::Binary) {
        p.lb[k] = std::max(p.lb[k], 0.0);
        p.ub[k] = std::min(p.ub[k], 1.0);
      }
    }
  }

  // Optional trailing sections: starting points and names. A section that is
  // started must be complete.
  auto skip_section = [&](const char* what) {
    if (in.at_end()) return false;
    in.record(1, what);
    const long cnt = in.integer(what);
    for (long e = 0; e < cnt; ++e) in.record(2, what);
    return true;
  };
  std::vector<std::string> con_names(m);
  if (skip_section("primal start") && (m == 0 || skip_section("constraint dual start")) &&
      skip_section("bound dual start") && !in.at_end()) {
    const long cnt = in.integer("variable name count");
    for (long e = 0; e < cnt; ++e) in.record(2, "variable name entry");
    if (!in.at_end()) {
      const long ccnt = in.integer("constraint name count");
      for (long e = 0; e < ccnt; ++e) {
        const auto& r = in.record(2, "constraint name entry");
        con_names[con_index(r[0])] = std::string(r[1]);
      }
    }
  }

  p.objective_terms = canonical_terms(std::move(obj_terms));
  for (long ci = 0; ci < m; ++ci) {
    const std::string name = con_names[ci].empty() ? "c" + std::to_string(ci + 1) : con_names[ci];
    if (std::isfinite(cl[ci]) && cl[ci] == cu[ci]) {
      add_constraint(p, name, con_terms[ci], con_lin[ci], -cl[ci], Sense::EQ);
      continue;
    }
    if (std::isfinite(cl[ci]))
      add_constraint(p, std::isfinite(cu[ci]) ? name + ".lo" : name, con_terms[ci], con_lin[ci], -cl[ci], Sense::GE);
    if (std::isfinite(cu[ci]))
      add_constraint(p, std::isfinite(cl[ci]) ? name + ".up" : name, con_terms[ci], con_lin[ci], -cu[ci], Sense::LE);
  }
  if (p.maximize) detail::negate_objective(p);
  return p;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads an instance file. `format` is "canonical" or "qplib"; an empty format
/// is inferred from the extension (.qplib, otherwise canonical).
inline Problem load_problem(const std::string& path, std::string format = "") {
  if (format.empty()) format = path.ends_with(".qplib") ? "qplib" : "canonical";
  const std::string text = read_file(path);
  if (format == "qplib") return parse_qplib(text);
  if (format == "canonical") return parse_canonical(text);
  throw std::invalid_argument("unknown format: " + format);
}

}  // namespace fwmiq
