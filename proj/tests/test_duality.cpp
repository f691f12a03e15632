#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include <broker/duality.hpp>
#include <broker/mechanisms.hpp>
#include <broker/oracle.hpp>

#include "support/fixtures.hpp"

using namespace broker;

namespace {

// Upper-bound terms evaluated straight from their defining sums over full
// profiles, with interim allocations accumulated here rather than taken
// from interim_form.
struct BruteTerms {
  double single = 0, under = 0, over = 0, tail = 0, core = 0, r = 0;
};

std::vector<double> brute_beta(const Matrix& v, std::size_t i, const std::vector<double>& costs) {
  std::vector<double> beta(costs);
  for (std::size_t k = 0; k < v.rows(); ++k) {
    if (k == i) continue;
    for (std::size_t j = 0; j < costs.size(); ++j) beta[j] = std::max(beta[j], v(k, j));
  }
  return beta;
}

double brute_r(const ProductionCostInstance& inst, const Matrix& v, std::size_t i, const std::vector<double>& beta) {
  double total = 0.0;
  for (std::size_t j = 0; j < inst.num_items(); ++j) {
    bool tie_below = false;
    for (std::size_t k = 0; k < i; ++k) tie_below = tie_below || v(k, j) == beta[j];
    double best = 0.0;
    for (double p : inst.dist(i, j).values()) {
      if (p < beta[j] || (tie_below && p == beta[j])) continue;
      best = std::max(best, (p - inst.cost(j)) * inst.dist(i, j).tail(p));
    }
    total += best;
  }
  return total;
}

BruteTerms brute_terms(const CostMechanism& mech, const ProductionCostInstance& inst) {
  const std::size_t n = inst.num_buyers();
  const std::size_t m = inst.num_items();
  std::vector<std::map<std::vector<double>, std::pair<double, std::vector<double>>>> interim(n);
  enumerate_profiles(inst, [&](const Profile& p, double prob) {
    for (const auto& [coin, w] : mech.coins()) {
      const auto out = mech.run(inst, p, coin);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = p.buyer_values.row(i);
        auto& cell = interim[i][std::vector<double>(row.begin(), row.end())];
        cell.second.resize(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) cell.second[j] += prob * w * out.buyer_alloc(i, j);
      }
    }
  });
  std::vector<std::map<std::vector<double>, double>> type_prob(n);
  for (std::size_t i = 0; i < n; ++i) {
    enumerate_types(inst.buyers()[i], [&](std::span<const double> t, double prob) {
      type_prob[i][std::vector<double>(t.begin(), t.end())] += prob;
    });
  }

  BruteTerms out;
  enumerate_profiles(inst, [&](const Profile& p, double prob) {
    const Matrix& v = p.buyer_values;
    for (std::size_t i = 0; i < n; ++i) {
      const auto beta = brute_beta(v, i, inst.costs());
      const double ri = brute_r(inst, v, i, beta);
      // Each opponent profile is visited once per own type; weight r by the own-type mass.
      auto row = v.row(i);
      const std::vector<double> vi(row.begin(), row.end());
      const auto& cell = interim[i].at(vi);
      const double dvi = type_prob[i].at(vi);
      out.r += prob * ri;

      double top = 0.0;
      for (std::size_t j = 0; j < m; ++j) top = std::max(top, vi[j] - beta[j]);
      std::size_t region = 0;
      if (top > 0) {
        for (std::size_t j = 0; j < m && region == 0; ++j) {
          if (vi[j] - beta[j] == top) region = j + 1;
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double x = cell.second[j] / dvi;
        const double c = inst.cost(j);
        const double s = vi[j] - beta[j];
        if (region == j + 1) out.single += prob * x * (buyer_virtual(inst.dist(i, j)).ironed_at(vi[j]) - c);
        if (vi[j] < beta[j]) {
          out.under += prob * x * (vi[j] - c);
        } else {
          out.over += prob * x * (beta[j] - c);
        }
        if (s > ri) {
          bool other = false;
          for (std::size_t k = 0; k < m; ++k) other = other || (k != j && vi[k] - beta[k] >= s);
          if (other) out.tail += prob * s;
        } else if (s >= 0) {
          out.core += prob * s;
        }
      }
    }
  });
  return out;
}

void expect_matches_brute(const CostMechanism& mech, const ProductionCostInstance& inst) {
  const auto terms = compute_terms(interim_form(mech, inst), inst);
  const auto brute = brute_terms(mech, inst);
  EXPECT_NEAR(terms.single, brute.single, 1e-9) << mech.name();
  EXPECT_NEAR(terms.under, brute.under, 1e-9) << mech.name();
  EXPECT_NEAR(terms.over, brute.over, 1e-9) << mech.name();
  EXPECT_NEAR(terms.tail, brute.tail, 1e-9) << mech.name();
  EXPECT_NEAR(terms.core, brute.core, 1e-9) << mech.name();
  EXPECT_NEAR(terms.r, brute.r, 1e-9) << mech.name();
}

}  // namespace

TEST(BetaMatrix, Examples) {
  Matrix opp(2, 2);
  opp(1, 0) = 3;
  opp(1, 1) = 0;
  EXPECT_EQ(beta_row(opp, 0, std::vector<double>{1, 2}), (std::vector<double>{3, 2}));
  EXPECT_EQ(beta_row(Matrix(1, 2), 0, std::vector<double>{1, 1}), (std::vector<double>{1, 1}));
  Matrix equal(2, 2);
  equal(1, 0) = 1;
  equal(1, 1) = 2;
  EXPECT_EQ(beta_row(equal, 0, std::vector<double>{1, 2}), (std::vector<double>{1, 2}));
}

TEST(Classify, Examples) {
  const std::vector<double> beta{1, 1};
  EXPECT_TRUE(classify(std::vector<double>{0, 0}, beta).is_zero());
  EXPECT_TRUE(classify(std::vector<double>{1, 1}, beta).is_zero());
  EXPECT_EQ(classify(std::vector<double>{3, 3}, beta), Region{1});
  EXPECT_EQ(classify(std::vector<double>{0, 4}, beta), Region{2});
  EXPECT_EQ(classify(std::vector<double>{0, 4}, beta).item(), 1u);
}

TEST(ComputeR, Examples) {
  EXPECT_DOUBLE_EQ(compute_r(fixtures::two_items()).total, 1.0);
  const ProductionCostInstance costly({{fixtures::coin02(), fixtures::coin02()}}, {5, 5});
  EXPECT_DOUBLE_EQ(compute_r(costly).total, 0.0);
  const ProductionCostInstance point({{DiscreteDist::point(3)}}, {0});
  EXPECT_DOUBLE_EQ(compute_r(point).total, 3.0);
  const auto table = compute_r(fixtures::two_items());
  ASSERT_EQ(table.buyers[0].size(), 1u);
  EXPECT_EQ(table.buyers[0][0].r_items, (std::vector<double>{0.5, 0.5}));
}

TEST(ComputeR, MatchesBruteForce) {
  for (const auto& inst : fixtures::random_cost_instances(60, 61)) {
    EXPECT_NEAR(compute_r(inst).total, brute_terms(NullMechanism{}, inst).r, 1e-9);
  }
}

TEST(InterimForm, SingleBuyerIsPointwise) {
  const auto inst = fixtures::two_items();
  const auto form = interim_form(ItMechanism{}, inst);
  ASSERT_EQ(form.buyers.size(), 1u);
  const auto& b = form.buyers[0];
  ASSERT_EQ(b.types.size(), 4u);
  for (std::size_t t = 0; t < b.types.size(); ++t) {
    const auto out = run_it(inst, fixtures::profile({b.types[t]}));
    EXPECT_EQ(b.x(t, 0), out.buyer_alloc(0, 0));
    EXPECT_EQ(b.x(t, 1), out.buyer_alloc(0, 1));
    EXPECT_EQ(b.p[t], out.buyer_pay[0]);
  }
}

TEST(InterimForm, NullIsZero) {
  const auto form = interim_form(NullMechanism{}, fixtures::random_cost_instances(4, 3).back());
  for (const auto& b : form.buyers) {
    for (std::size_t t = 0; t < b.types.size(); ++t) {
      EXPECT_EQ(b.p[t], 0.0);
      for (std::size_t j = 0; j < b.x.cols(); ++j) EXPECT_EQ(b.x(t, j), 0.0);
    }
  }
}

TEST(InterimForm, BvcgTwoBuyersAveragesOpponents) {
  const DiscreteDist d({1, 3}, {0.4, 0.6});
  const ProductionCostInstance inst({{d}, {d}}, {0.5});
  const auto form = interim_form(BvcgMechanism{}, inst);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& b = form.buyers[i];
    ASSERT_EQ(b.types.size(), 2u);
    for (std::size_t t = 0; t < 2; ++t) {
      double x = 0.0;
      double p = 0.0;
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<std::vector<double>> rows(2);
        rows[i] = {b.types[t][0]};
        rows[1 - i] = {d.value(k)};
        const auto out = run_bvcg(inst, fixtures::profile(rows));
        x += d.prob(k) * out.buyer_alloc(i, 0);
        p += d.prob(k) * out.buyer_pay[i];
      }
      EXPECT_NEAR(b.x(t, 0), x, 1e-12);
      EXPECT_NEAR(b.p[t], p, 1e-12);
    }
  }
  EXPECT_NEAR(form.profit(inst.costs()), expected_profit(BvcgMechanism{}, inst).value, 1e-12);
}

TEST(ComputeTerms, NullMechanismKeepsTailAndCore) {
  const auto inst = fixtures::two_items();
  const auto null = compute_terms(interim_form(NullMechanism{}, inst), inst);
  const auto it = compute_terms(interim_form(ItMechanism{}, inst), inst);
  EXPECT_EQ(null.single, 0.0);
  EXPECT_EQ(null.under, 0.0);
  EXPECT_EQ(null.over, 0.0);
  EXPECT_EQ(null.tail, it.tail);
  EXPECT_EQ(null.core, it.core);
}

TEST(ComputeTerms, OneItemHasNoTail) {
  for (const auto& inst : fixtures::random_cost_instances(40, 67)) {
    if (inst.num_items() != 1) continue;
    EXPECT_EQ(compute_terms(interim_form(MixMechanism{}, inst), inst).tail, 0.0);
  }
}

TEST(ComputeTerms, MicroInstanceBoundsIt) {
  const auto inst = fixtures::two_items();
  const auto terms = compute_terms(interim_form(ItMechanism{}, inst), inst);
  EXPECT_LE(expected_profit(ItMechanism{}, inst).value, terms.sum() + 1e-9);
  EXPECT_DOUBLE_EQ(terms.r, 1.0);
}

TEST(ComputeTerms, MatchesBruteForce) {
  for (const auto& inst : fixtures::random_cost_instances(40, 71)) {
    for (const auto& m : fixtures::shipped()) expect_matches_brute(*m, inst);
  }
}

TEST(ComputeTerms, TailNeverNegative) {
  brokerctl::GenOptions o;
  o.seed = 3;
  const auto inst = std::get<ProductionCostInstance>(brokerctl::generate(o, 0));
  EXPECT_GE(compute_terms(interim_form(NullMechanism{}, inst), inst).tail, 0.0);
}

TEST(ComputeTerms, NonNegativeParts) {
  for (const auto& inst : fixtures::random_cost_instances(40, 73)) {
    const auto terms = compute_terms(interim_form(MixMechanism{}, inst), inst);
    EXPECT_GE(terms.r, 0.0);
    EXPECT_GE(terms.tail, 0.0);
    EXPECT_GE(terms.core, 0.0);
  }
}

TEST(ComputeTerms, BoundInequalitiesOnRandomInstances) {
  for (const auto& inst : fixtures::random_cost_instances(40, 79)) {
    const double copies = copies_opt(inst);
    const double bvcg = expected_profit(BvcgMechanism{}, inst).value;
    auto mechanisms = fixtures::shipped();
    mechanisms.push_back(solve_opt_lp(inst).mechanism);
    for (const auto& m : mechanisms) {
      const auto terms = compute_terms(interim_form(*m, inst), inst);
      EXPECT_LE(expected_profit(*m, inst).value, terms.sum() + 1e-9) << m->name();
      EXPECT_LE(terms.single, copies + 1e-9) << m->name();
      EXPECT_LE(terms.under, copies + 1e-9) << m->name();
      EXPECT_LE(terms.over, copies + 1e-9) << m->name();
      EXPECT_LE(terms.tail, terms.r + 1e-9) << m->name();
      EXPECT_LE(terms.core, 2 * terms.r + 2 * bvcg + 1e-9) << m->name();
    }
  }
}

TEST(CoreEntry, MicroInstance) {
  const auto entry = core_entry_quantities(fixtures::two_items(), 0, Matrix(1, 2));
  EXPECT_DOUBLE_EQ(entry.r, 1.0);
  EXPECT_DOUBLE_EQ(entry.e_hat, -1.0);
  ASSERT_EQ(entry.b.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(entry.b[j].values(), (std::vector<double>{0, 1}));
    EXPECT_EQ(entry.b[j].probs(), (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(entry.d[j], entry.b[j]);
  }
  EXPECT_DOUBLE_EQ(entry.median_mass, 1.0);
}

TEST(CoreEntry, ReserveAboveSupport) {
  const ProductionCostInstance inst({{fixtures::coin02()}}, {5});
  const auto entry = core_entry_quantities(inst, 0, Matrix(1, 1));
  EXPECT_EQ(entry.b[0].values(), (std::vector<double>{0}));
  EXPECT_EQ(entry.d[0].values(), (std::vector<double>{0}));
  EXPECT_DOUBLE_EQ(entry.e_hat, -2.0 * entry.r);
}

TEST(CoreEntry, PointMassIsDeterministic) {
  const ProductionCostInstance inst({{DiscreteDist::point(4), DiscreteDist::point(1)}}, {1, 0});
  const auto entry = core_entry_quantities(inst, 0, Matrix(1, 2));
  EXPECT_EQ(entry.b[0].size(), 1u);
  EXPECT_EQ(entry.b[0].value(0), 3.0);
  EXPECT_EQ(entry.b[1].value(0), 1.0);
}

TEST(CoreEntry, MedianBoundHolds) {
  for (const auto& inst : fixtures::random_cost_instances(60, 83)) {
    for (std::size_t i = 0; i < inst.num_buyers(); ++i) {
      enumerate_opponents(inst, i, [&](const Matrix& opponents, double) {
        EXPECT_GE(core_entry_quantities(inst, i, opponents).median_mass, 0.5 - 1e-12);
      });
    }
  }
}
