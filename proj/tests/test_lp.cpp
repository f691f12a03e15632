#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <broker/errors.hpp>
#include <broker/lp.hpp>

using namespace broker;

namespace {

lp::Program textbook() {
  lp::Program p(2);
  p.objective = {3, 5};
  p.add_row({{0, 1}}, 4);
  p.add_row({{1, 2}}, 12);
  p.add_row({{0, 3}, {1, 2}}, 18);
  return p;
}

// Beale's example; Dantzig's rule with lowest-index ties cycles on it.
lp::Program beale() {
  lp::Program p(4);
  p.objective = {0.75, -20, 0.5, -6};
  p.add_row({{0, 0.25}, {1, -8}, {2, -1}, {3, 9}}, 0);
  p.add_row({{0, 0.5}, {1, -12}, {2, -0.5}, {3, 3}}, 0);
  p.add_row({{2, 1}}, 1);
  return p;
}

// Best objective over all vertices of a two-variable polygon.
double vertex_oracle(const lp::Program& p) {
  struct Line {
    double a, b, c;
  };
  std::vector<Line> lines{{1, 0, 0}, {0, 1, 0}};
  for (const auto& row : p.rows) {
    Line l{0, 0, row.rhs};
    for (const auto& [v, a] : row.terms) (v == 0 ? l.a : l.b) += a;
    lines.push_back(l);
  }
  auto feasible = [&](double x, double y) {
    if (x < -1e-9 || y < -1e-9) return false;
    for (std::size_t k = 2; k < lines.size(); ++k) {
      if (lines[k].a * x + lines[k].b * y > lines[k].c + 1e-9) return false;
    }
    return true;
  };
  double best = -1e300;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double det = lines[i].a * lines[j].b - lines[i].b * lines[j].a;
      if (std::abs(det) < 1e-12) continue;
      const double x = (lines[i].c * lines[j].b - lines[i].b * lines[j].c) / det;
      const double y = (lines[i].a * lines[j].c - lines[i].c * lines[j].a) / det;
      if (feasible(x, y)) best = std::max(best, p.objective[0] * x + p.objective[1] * y);
    }
  }
  return best;
}

}  // namespace

TEST(Simplex, Textbook) {
  const auto p = textbook();
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.value, 36.0, 1e-9);
  EXPECT_NEAR(s.x[0], 2.0, 1e-9);
  EXPECT_NEAR(s.x[1], 6.0, 1e-9);
  ASSERT_EQ(s.y.size(), 3u);
  EXPECT_NEAR(s.y[0], 0.0, 1e-9);
  EXPECT_NEAR(s.y[1], 1.5, 1e-9);
  EXPECT_NEAR(s.y[2], 1.0, 1e-9);
  EXPECT_LE(s.certificate.worst(), 1e-9);
}

TEST(Simplex, BealeDoesNotCycle) {
  for (std::size_t run : {std::size_t{1}, std::size_t{50}}) {
    lp::Options o;
    o.degenerate_run = run;
    o.max_pivots = 1000;
    const auto s = lp::solve(beale(), o);
    ASSERT_EQ(s.status, lp::Status::optimal);
    EXPECT_NEAR(s.value, 1.25, 1e-9);
    EXPECT_NEAR(s.x[0], 1.0, 1e-9);
    EXPECT_NEAR(s.x[2], 1.0, 1e-9);
    EXPECT_LE(s.certificate.worst(), 1e-9);
  }
}

TEST(Simplex, DetectsUnbounded) {
  lp::Program p(2);
  p.objective = {1, 1};
  p.add_row({{0, 1}, {1, -1}}, 1);
  EXPECT_EQ(lp::solve(p).status, lp::Status::unbounded);
}

TEST(Simplex, ZeroObjectiveStaysAtOrigin) {
  lp::Program p(2);
  p.add_row({{0, 1}, {1, 1}}, 3);
  const auto s = lp::solve(p);
  EXPECT_EQ(s.status, lp::Status::optimal);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(s.pivots, 0u);
}

TEST(Simplex, NegativeRightHandSideRejected) {
  lp::Program p(1);
  p.objective = {1};
  p.add_row({{0, 1}}, -1);
  EXPECT_THROW(lp::solve(p), InputError);
}

TEST(Simplex, PivotLimit) {
  lp::Options o;
  o.max_pivots = 1;
  EXPECT_THROW(lp::solve(textbook(), o), InternalError);
}

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-3, 5);
  std::uniform_real_distribution<double> rhs(0, 10);
  for (int rep = 0; rep < 500; ++rep) {
    lp::Program p(2);
    p.objective = {coef(rng), coef(rng)};
    p.add_row({{0, 1}, {1, 1}}, 20);  // keeps every instance bounded
    const int extra = 1 + rep % 4;
    for (int k = 0; k < extra; ++k) p.add_row({{0, coef(rng)}, {1, coef(rng)}}, rhs(rng));
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::optimal);
    EXPECT_NEAR(s.value, vertex_oracle(p), 1e-7) << "rep " << rep;
    EXPECT_LE(s.certificate.worst(), 1e-7);
  }
}

TEST(Certificate, FlagsBadCandidates) {
  const auto p = textbook();
  const auto good = lp::certify(p, {2, 6}, {0, 1.5, 1});
  EXPECT_LE(good.worst(), 1e-12);
  const auto infeasible = lp::certify(p, {5, 6}, {0, 1.5, 1});
  EXPECT_NEAR(infeasible.primal_infeasibility, 9.0, 1e-12);
  const auto weak_dual = lp::certify(p, {2, 6}, {0, 0, 0});
  EXPECT_NEAR(weak_dual.dual_infeasibility, 5.0, 1e-12);
  EXPECT_NEAR(weak_dual.gap, 36.0, 1e-12);
}
