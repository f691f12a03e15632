#include "broker/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "broker/errors.hpp"

namespace broker::lp {

namespace {

constexpr double kDrop = 1e-13;

/// Compact (Tucker) tableau: each basic variable equals rhs minus the row
/// times the nonbasic variables; the last row carries the negated reduced costs.
class Tableau {
 public:
  Tableau(const Program& p) : rows_(p.rows.size()), cols_(p.num_vars), width_(cols_ + 1), data_((rows_ + 1) * width_, 0.0) {
    basis_.resize(rows_);
    nonbasic_.resize(cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (p.rows[r].rhs < 0.0) throw InputError("LP right-hand side must be non-negative");
      for (const auto& [var, coef] : p.rows[r].terms) at(r, var) += coef;
      at(r, cols_) = p.rows[r].rhs;
      basis_[r] = cols_ + r;
    }
    for (std::size_t k = 0; k < cols_; ++k) {
      at(rows_, k) = -p.objective[k];
      nonbasic_[k] = k;
    }
  }

  double& at(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * width_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t basic(std::size_t r) const { return basis_[r]; }
  std::size_t nonbasic(std::size_t k) const { return nonbasic_[k]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double piv = at(pr, pc);
    nz_.clear();
    for (std::size_t c = 0; c <= cols_; ++c) {
      if (c == pc) continue;
      double& v = at(pr, c);
      v /= piv;
      if (std::abs(v) < kDrop) v = 0.0;
      if (v != 0.0) nz_.push_back(c);
    }
    at(pr, pc) = 1.0 / piv;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      double* row = &data_[r * width_];
      const double* prow = &data_[pr * width_];
      for (std::size_t c : nz_) {
        row[c] -= f * prow[c];
        if (std::abs(row[c]) < kDrop) row[c] = 0.0;
      }
      row[pc] = -f / piv;
    }
    std::swap(basis_[pr], nonbasic_[pc]);
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonbasic_;
  std::vector<std::size_t> nz_;
};

}  // namespace

double Certificate::worst() const { return std::max({primal_infeasibility, dual_infeasibility, gap}); }

Certificate certify(const Program& program, const std::vector<double>& x, const std::vector<double>& y) {
  Certificate cert{0.0, 0.0, 0.0};
  std::vector<double> aty(program.num_vars, 0.0);
  double primal = 0.0;
  double dual = 0.0;
  for (std::size_t k = 0; k < program.num_vars; ++k) {
    cert.primal_infeasibility = std::max(cert.primal_infeasibility, -x[k]);
    primal += program.objective[k] * x[k];
  }
  for (std::size_t r = 0; r < program.rows.size(); ++r) {
    const auto& row = program.rows[r];
    double ax = 0.0;
    for (const auto& [var, coef] : row.terms) {
      ax += coef * x[var];
      aty[var] += coef * y[r];
    }
    cert.primal_infeasibility = std::max(cert.primal_infeasibility, ax - row.rhs);
    cert.dual_infeasibility = std::max(cert.dual_infeasibility, -y[r]);
    dual += row.rhs * y[r];
  }
  for (std::size_t k = 0; k < program.num_vars; ++k) {
    cert.dual_infeasibility = std::max(cert.dual_infeasibility, program.objective[k] - aty[k]);
  }
  cert.gap = std::abs(primal - dual);
  return cert;
}

Solution solve(const Program& program, const Options& options) {
  Tableau t(program);
  const std::size_t m = t.rows();
  const std::size_t n = t.cols();
  const double tol = options.tolerance;
  std::size_t degenerate = 0;
  bool bland = false;
  std::uint64_t pivots = 0;

  while (true) {
    std::size_t enter = n;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = t.at(m, k);
      if (d >= -tol) continue;
      if (enter == n) {
        enter = k;
      } else if (bland ? t.nonbasic(k) < t.nonbasic(enter) : d < t.at(m, enter)) {
        enter = k;
      }
    }
    if (enter == n) break;

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = t.at(r, enter);
      if (a <= tol) continue;
      const double ratio = std::max(0.0, t.at(r, n)) / a;
      if (leave == m || ratio < best_ratio - 1e-12) {
        leave = r;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12) {
        const bool better = bland ? t.basic(r) < t.basic(leave) : a > t.at(leave, enter);
        if (better) {
          leave = r;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    if (leave == m) {
      Solution s{Status::unbounded, std::numeric_limits<double>::infinity(), {}, {}, {}, pivots};
      return s;
    }

    if (best_ratio <= tol) {
      if (++degenerate >= options.degenerate_run) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    t.pivot(leave, enter);
    if (++pivots > options.max_pivots) {
      throw InternalError("simplex exceeded " + std::to_string(options.max_pivots) + " pivots");
    }
  }

  Solution s{Status::optimal, 0.0, std::vector<double>(n, 0.0), std::vector<double>(m, 0.0), {}, pivots};
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basic(r) < n) s.x[t.basic(r)] = std::max(0.0, t.at(r, n));
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (t.nonbasic(k) >= n) s.y[t.nonbasic(k) - n] = std::max(0.0, t.at(m, k));
  }
  for (std::size_t k = 0; k < n; ++k) s.value += program.objective[k] * s.x[k];
  s.certificate = certify(program, s.x, s.y);
  return s;
}

}  // namespace broker::lp
