#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace broker::lp {

/// max c'x  s.t.  A x <= b,  x >= 0,  with b >= 0 so the origin is feasible.
struct Program {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    double rhs;
  };
  std::vector<Row> rows;

  explicit Program(std::size_t vars = 0) : num_vars(vars), objective(vars, 0.0) {}
  void add_row(std::vector<std::pair<std::size_t, double>> terms, double rhs) {
    rows.push_back({std::move(terms), rhs});
  }
};

enum class Status { optimal, unbounded };

/// Residuals of the optimality certificate (x, y).
struct Certificate {
  double primal_infeasibility;  // max over rows of (Ax - b)^+ and over vars of (-x)^+
  double dual_infeasibility;    // max over vars of (c - A'y)^+ and over rows of (-y)^+
  double gap;                   // |c'x - b'y|
  double worst() const;
};

struct Solution {
  Status status;
  double value;
  std::vector<double> x;
  std::vector<double> y;
  Certificate certificate;
  std::uint64_t pivots;
};

struct Options {
  double tolerance = 1e-10;
  std::size_t degenerate_run = 50;  // switch to Bland's rule after this many degenerate pivots
  std::uint64_t max_pivots = 1'000'000;
};

/// Dense tableau simplex. Throws InputError on a negative right-hand side and
/// InternalError if the pivot limit is reached.
Solution solve(const Program& program, const Options& options = {});

Certificate certify(const Program& program, const std::vector<double>& x, const std::vector<double>& y);

}  // namespace broker::lp
