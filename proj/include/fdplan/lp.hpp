#pragma once

// Sparse LP/MILP container:  min c'x  s.t.  A_le x <= b_le,  A_eq x = b_eq,
// lower <= x <= upper, and x_j in {0,1} for j in `integral`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  std::size_t var = 0;
  double coef = 0.0;

  bool operator==(const Term&) const = default;
};

using SparseRow = std::vector<Term>;

struct LinearProgram {
  std::vector<double> objective;
  std::vector<SparseRow> le_rows;
  std::vector<double> le_rhs;
  std::vector<SparseRow> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::size_t> integral;  // sorted, bounds within [0,1]

  // Optional labels, used by the text dump only.
  std::vector<std::string> var_names;
  std::vector<std::string> le_names;
  std::vector<std::string> eq_names;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return le_rows.size() + eq_rows.size(); }

  std::size_t add_var(double lo, double hi, double cost, std::string name = {}) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    if (!name.empty() || !var_names.empty()) {
      var_names.resize(objective.size() - 1);
      var_names.push_back(std::move(name));
    }
    return objective.size() - 1;
  }

  void add_le(SparseRow row, double rhs, std::string name = {}) {
    le_rows.push_back(std::move(row));
    le_rhs.push_back(rhs);
    if (!name.empty() || !le_names.empty()) {
      le_names.resize(le_rows.size() - 1);
      le_names.push_back(std::move(name));
    }
  }

  // a'x >= rhs stored as -a'x <= -rhs.
  void add_ge(SparseRow row, double rhs, std::string name = {}) {
    for (auto& t : row) t.coef = -t.coef;
    add_le(std::move(row), -rhs, std::move(name));
  }

  void add_eq(SparseRow row, double rhs, std::string name = {}) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(rhs);
    if (!name.empty() || !eq_names.empty()) {
      eq_names.resize(eq_rows.size() - 1);
      eq_names.push_back(std::move(name));
    }
  }

  void mark_integral(std::size_t var) {
    auto it = std::lower_bound(integral.begin(), integral.end(), var);
    if (it == integral.end() || *it != var) integral.insert(it, var);
  }

  bool is_integral(std::size_t var) const {
    return std::binary_search(integral.begin(), integral.end(), var);
  }

  // Throws std::invalid_argument on inconsistent data.
  void check() const {
    const auto n = num_vars();
    if (lower.size() != n || upper.size() != n) throw std::invalid_argument("bound vector length");
    if (le_rhs.size() != le_rows.size() || eq_rhs.size() != eq_rows.size())
      throw std::invalid_argument("rhs vector length");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(objective[j])) throw std::invalid_argument("objective must be finite");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
          lower[j] == kInf || upper[j] == -kInf)
        throw std::invalid_argument("invalid bounds on variable " + std::to_string(j));
    }
    auto check_rows = [n](const std::vector<SparseRow>& rows, const std::vector<double>& rhs) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!std::isfinite(rhs[i])) throw std::invalid_argument("rhs must be finite");
        for (const auto& t : rows[i])
          if (t.var >= n || !std::isfinite(t.coef))
            throw std::invalid_argument("bad coefficient in row " + std::to_string(i));
      }
    };
    check_rows(le_rows, le_rhs);
    check_rows(eq_rows, eq_rhs);
    for (auto j : integral) {
      if (j >= n) throw std::invalid_argument("integral index out of range");
      if (lower[j] < 0.0 || upper[j] > 1.0)
        throw std::invalid_argument("integral variable bounds must lie within [0,1]");
    }
  }

  double evaluate_objective(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) v += objective[j] * x[j];
    return v;
  }

  // Largest violation of rows and bounds at x, in the LP's own units.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    auto dot = [&x](const SparseRow& r) {
      double v = 0.0;
      for (const auto& t : r) v += t.coef * x[t.var];
      return v;
    };
    for (std::size_t i = 0; i < le_rows.size(); ++i)
      worst = std::max(worst, dot(le_rows[i]) - le_rhs[i]);
    for (std::size_t i = 0; i < eq_rows.size(); ++i)
      worst = std::max(worst, std::abs(dot(eq_rows[i]) - eq_rhs[i]));
    for (std::size_t j = 0; j < x.size(); ++j) {
      worst = std::max(worst, lower[j] - x[j]);
      worst = std::max(worst, x[j] - upper[j]);
    }
    return worst;
  }
};

namespace detail {

inline std::string lp_name(const std::vector<std::string>& names, std::size_t i, char prefix) {
  if (i < names.size() && !names[i].empty()) return names[i];
  return std::string(1, prefix) + std::to_string(i);
}

inline void lp_terms(std::ostream& os, const SparseRow& row, const LinearProgram& lp) {
  bool first = true;
  for (const auto& t : row) {
    if (t.coef == 0.0) continue;
    os << (t.coef < 0 ? " - " : (first ? " " : " + ")) << std::abs(t.coef) << ' '
       << lp_name(lp.var_names, t.var, 'x');
    first = false;
  }
  if (first) os << " 0 " << lp_name(lp.var_names, 0, 'x');
}

}  // namespace detail

// Writes the problem in CPLEX LP text format.
inline void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  const auto old = os.precision(17);
  os << "\\ generated by fdplan\nMinimize\n obj:";
  SparseRow obj;
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    if (lp.objective[j] != 0.0) obj.push_back({j, lp.objective[j]});
  detail::lp_terms(os, obj, lp);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.le_rows.size(); ++i) {
    os << ' ' << detail::lp_name(lp.le_names, i, 'r') << ':';
    detail::lp_terms(os, lp.le_rows[i], lp);
    os << " <= " << lp.le_rhs[i] << '\n';
  }
  for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) {
    os << ' ' << detail::lp_name(lp.eq_names, i, 'e') << ':';
    detail::lp_terms(os, lp.eq_rows[i], lp);
    os << " = " << lp.eq_rhs[i] << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const auto name = detail::lp_name(lp.var_names, j, 'x');
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (lo == -kInf && hi == kInf) {
      os << ' ' << name << " free\n";
    } else {
      os << ' ';
      if (lo == -kInf) os << "-inf";
      else os << lo;
      os << " <= " << name << " <= ";
      if (hi == kInf) os << "+inf";
      else os << hi;
      os << '\n';
    }
  }
  if (!lp.integral.empty()) {
    os << "Binaries\n";
    for (auto j : lp.integral) os << ' ' << detail::lp_name(lp.var_names, j, 'x') << '\n';
  }
  os << "End\n";
  os.precision(old);
}

}  // namespace fdplan
