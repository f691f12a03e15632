#include "broker/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "broker/errors.hpp"
#include "broker/mechanisms.hpp"
#include "broker/reduction.hpp"

namespace broker {

namespace {

constexpr double kLpResidual = 1e-7;

/// Mixed-radix index over the flattened buyer-item supports, last position fastest.
class ProfileIndexer {
 public:
  explicit ProfileIndexer(const ProductionCostInstance& instance) : m_(instance.num_items()) {
    for (const auto& buyer : instance.buyers()) {
      for (const auto& d : buyer) dists_.push_back(&d);
    }
    stride_.assign(dists_.size(), 1);
    for (std::size_t k = dists_.size(); k-- > 1;) stride_[k - 1] = stride_[k] * dists_[k]->size();
    count_ = dists_.empty() ? 1 : stride_[0] * dists_[0]->size();
  }

  std::uint64_t count() const { return count_; }
  std::size_t positions() const { return dists_.size(); }
  std::uint64_t stride(std::size_t k) const { return stride_[k]; }

  std::size_t digit(std::uint64_t index, std::size_t k) const { return (index / stride_[k]) % dists_[k]->size(); }
  double value(std::uint64_t index, std::size_t k) const { return dists_[k]->value(digit(index, k)); }
  double prob(std::uint64_t index) const {
    double p = 1.0;
    for (std::size_t k = 0; k < dists_.size(); ++k) p *= dists_[k]->prob(digit(index, k));
    return p;
  }

  std::uint64_t index(const Matrix& values) const {
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < dists_.size(); ++k) {
      const std::size_t d = dists_[k]->index_of(values(k / m_, k % m_));
      if (d >= dists_[k]->size()) throw InputError("profile value is outside the support");
      idx += d * stride_[k];
    }
    return idx;
  }

 private:
  std::size_t m_;
  std::vector<const DiscreteDist*> dists_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t count_ = 1;
};

std::string describe(const Profile& profile) {
  std::ostringstream os;
  os << "v=[";
  for (std::size_t i = 0; i < profile.num_buyers(); ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < profile.num_items(); ++j) os << (j ? "," : "") << profile.buyer_values(i, j);
    os << "]";
  }
  os << "]";
  if (profile.seller_values) {
    os << " s=[";
    for (std::size_t j = 0; j < profile.seller_values->size(); ++j) os << (j ? "," : "") << (*profile.seller_values)[j];
    os << "]";
  }
  return os.str();
}

std::string describe(std::span<const double> values) {
  std::ostringstream os;
  os << "[";
  for (std::size_t j = 0; j < values.size(); ++j) os << (j ? "," : "") << values[j];
  os << "]";
  return os.str();
}

std::string coin_suffix(const Coin& coin) {
  return coin.branch == Branch::none ? std::string() : " coin=" + to_string(coin.branch);
}

template <class Instance>
CheckReport buyer_dsic(const Mechanism<Instance>& mechanism, const Instance& instance) {
  CheckReport report{Property::dsic_buyer};
  const auto coins = mechanism.coins();
  enumerate_profiles(instance, [&](const Profile& truth, double) {
    Profile lie = truth;
    for (const auto& [coin, weight] : coins) {
      const Outcome honest = mechanism.run(instance, truth, coin);
      for (std::size_t i = 0; i < instance.num_buyers(); ++i) {
        const auto values = truth.buyer_values.row(i);
        const double u = buyer_utility(honest, i, values);
        enumerate_types(instance.buyers()[i], [&](std::span<const double> claim, double) {
          if (std::equal(claim.begin(), claim.end(), values.begin())) return;
          std::copy(claim.begin(), claim.end(), lie.buyer_values.row(i).begin());
          const double gap = buyer_utility(mechanism.run(instance, lie, coin), i, values) - u;
          if (gap > kTolerance) {
            report.add(describe(truth) + " buyer " + std::to_string(i) + " reports " + describe(claim) +
                           coin_suffix(coin),
                       gap);
          }
        });
        std::copy(values.begin(), values.end(), lie.buyer_values.row(i).begin());
      }
    }
  });
  return report;
}

template <class Instance>
CheckReport ir_check(const Mechanism<Instance>& mechanism, const Instance& instance) {
  CheckReport report{Property::ir};
  const auto coins = mechanism.coins();
  enumerate_profiles(instance, [&](const Profile& profile, double) {
    for (const auto& [coin, weight] : coins) {
      const Outcome out = mechanism.run(instance, profile, coin);
      for (std::size_t i = 0; i < instance.num_buyers(); ++i) {
        const double u = buyer_utility(out, i, profile.buyer_values.row(i));
        if (u < -kTolerance) report.add(describe(profile) + " buyer " + std::to_string(i) + coin_suffix(coin), -u);
      }
      if (profile.seller_values) {
        for (std::size_t j = 0; j < instance.num_items(); ++j) {
          const double u = seller_utility(out, j, (*profile.seller_values)[j]);
          if (u < -kTolerance) report.add(describe(profile) + " seller " + std::to_string(j) + coin_suffix(coin), -u);
        }
      }
    }
  });
  return report;
}

template <class Instance>
CheckReport feasibility_check(const Mechanism<Instance>& mechanism, const Instance& instance) {
  CheckReport report{Property::feasible};
  const auto coins = mechanism.coins();
  enumerate_profiles(instance, [&](const Profile& profile, double) {
    for (const auto& [coin, weight] : coins) {
      const Outcome out = mechanism.run(instance, profile, coin);
      if (!check_feasible(out)) {
        double excess = 0.0;
        for (std::size_t j = 0; j < instance.num_items(); ++j) {
          excess = std::max(excess, out.item_sold(j) - out.seller_sold[j]);
        }
        report.add(describe(profile) + coin_suffix(coin), excess);
      }
    }
  });
  return report;
}

lp::Program build_program(const ProductionCostInstance& instance, const ProfileIndexer& index) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  const std::uint64_t profiles = index.count();
  const std::size_t alloc_vars = profiles * n * m;
  auto x = [&](std::uint64_t v, std::size_t i, std::size_t j) { return (v * n + i) * m + j; };
  auto p = [&](std::uint64_t v, std::size_t i) { return alloc_vars + v * n + i; };

  lp::Program program(alloc_vars + profiles * n);
  for (std::uint64_t v = 0; v < profiles; ++v) {
    const double prob = index.prob(v);
    for (std::size_t i = 0; i < n; ++i) {
      program.objective[p(v, i)] = prob;
      for (std::size_t j = 0; j < m; ++j) program.objective[x(v, i, j)] = -prob * instance.cost(j);
    }
  }
  // Supply.
  for (std::uint64_t v = 0; v < profiles; ++v) {
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t i = 0; i < n; ++i) terms.emplace_back(x(v, i, j), 1.0);
      program.add_row(std::move(terms), 1.0);
    }
  }
  // IR.
  for (std::uint64_t v = 0; v < profiles; ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<std::size_t, double>> terms{{p(v, i), 1.0}};
      for (std::size_t j = 0; j < m; ++j) terms.emplace_back(x(v, i, j), -index.value(v, i * m + j));
      program.add_row(std::move(terms), 0.0);
    }
  }
  // DSIC: utility of reporting type t' with true type t at the same opponents.
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t low = index.stride(i * m + m - 1);
    const std::uint64_t block = index.stride(i * m) * instance.dist(i, 0).size();
    const std::uint64_t types = block / low;
    for (std::uint64_t v = 0; v < profiles; ++v) {
      const std::uint64_t own = (v % block) / low;
      const std::uint64_t base = v - own * low;
      for (std::uint64_t t = 0; t < types; ++t) {
        if (t == own) continue;
        const std::uint64_t w = base + t * low;
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t j = 0; j < m; ++j) {
          const double value = index.value(v, i * m + j);
          terms.emplace_back(x(w, i, j), value);
          terms.emplace_back(x(v, i, j), -value);
        }
        terms.emplace_back(p(w, i), -1.0);
        terms.emplace_back(p(v, i), 1.0);
        program.add_row(std::move(terms), 0.0);
      }
    }
  }
  return program;
}

}  // namespace

void CheckReport::add(std::string description, double gap) {
  passed = false;
  ++violations;
  if (witnesses.size() < kMaxWitnesses) witnesses.push_back({std::move(description), gap});
}

std::string to_string(Property property) {
  switch (property) {
    case Property::dsic_buyer:
      return "dsic_buyer";
    case Property::dsic_seller:
      return "dsic_seller";
    case Property::ir:
      return "ir";
    case Property::feasible:
      return "feasible";
    case Property::cost_monotone:
      return "cost_monotone";
  }
  return "unknown";
}

LpMechanism::LpMechanism(ProductionCostInstance instance, std::vector<Outcome> table)
    : instance_(std::move(instance)), table_(std::move(table)) {}

Outcome LpMechanism::run(const ProductionCostInstance&, const Profile& profile, const Coin&) const {
  return table_.at(ProfileIndexer(instance_).index(profile.buyer_values));
}

LpOptimum solve_opt_lp(const ProductionCostInstance& instance, const LpLimits& limits) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  const std::uint64_t count = profile_count(instance);
  if (n > limits.max_buyers || m > limits.max_items || count > limits.max_profiles) {
    throw SizeGuardError("LP oracle accepts at most " + std::to_string(limits.max_buyers) + " buyers, " +
                         std::to_string(limits.max_items) + " items and " + std::to_string(limits.max_profiles) +
                         " profiles; instance has " + std::to_string(n) + ", " + std::to_string(m) + ", " +
                         std::to_string(count));
  }
  const ProfileIndexer index(instance);
  const auto program = build_program(instance, index);
  const auto solution = lp::solve(program);
  if (solution.status != lp::Status::optimal) throw InternalError("optimal-mechanism LP is unbounded");
  if (solution.certificate.worst() > kLpResidual) {
    std::ostringstream os;
    os << "LP certificate residual " << solution.certificate.worst() << " exceeds " << kLpResidual;
    throw InternalError(os.str());
  }
  std::vector<Outcome> table;
  table.reserve(index.count());
  const std::size_t alloc_vars = index.count() * n * m;
  for (std::uint64_t v = 0; v < index.count(); ++v) {
    Outcome out = Outcome::empty(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) out.buyer_alloc(i, j) = solution.x[(v * n + i) * m + j];
      out.buyer_pay[i] = solution.x[alloc_vars + v * n + i];
    }
    for (std::size_t j = 0; j < m; ++j) out.seller_sold[j] = std::min(1.0, out.item_sold(j));
    table.push_back(std::move(out));
  }
  return {solution.value, solution.certificate, solution.pivots,
          std::make_shared<const LpMechanism>(instance, std::move(table))};
}

double opt_lp(const ProductionCostInstance& instance, const LpLimits& limits) {
  return solve_opt_lp(instance, limits).value;
}

CheckReport check_dsic(const CostMechanism& mechanism, const ProductionCostInstance& instance) {
  return buyer_dsic(mechanism, instance);
}

CheckReport check_dsic(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance, Side side) {
  if (side == Side::buyer) return buyer_dsic(mechanism, instance);
  CheckReport report{Property::dsic_seller};
  const auto coins = mechanism.coins();
  enumerate_profiles(instance, [&](const Profile& truth, double) {
    Profile lie = truth;
    auto& lie_sellers = *lie.seller_values;
    for (const auto& [coin, weight] : coins) {
      const Outcome honest = mechanism.run(instance, truth, coin);
      for (std::size_t j = 0; j < instance.num_items(); ++j) {
        const double value = (*truth.seller_values)[j];
        const double u = seller_utility(honest, j, value);
        for (double claim : instance.seller(j).values()) {
          if (claim == value) continue;
          lie_sellers[j] = claim;
          const double gap = seller_utility(mechanism.run(instance, lie, coin), j, value) - u;
          if (gap > kTolerance) {
            std::ostringstream os;
            os << describe(truth) << " seller " << j << " reports " << claim << coin_suffix(coin);
            report.add(os.str(), gap);
          }
        }
        lie_sellers[j] = value;
      }
    }
  });
  return report;
}

CheckReport check_ir(const CostMechanism& mechanism, const ProductionCostInstance& instance) {
  return ir_check(mechanism, instance);
}

CheckReport check_ir(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance) {
  return ir_check(mechanism, instance);
}

CheckReport check_feasible(const CostMechanism& mechanism, const ProductionCostInstance& instance) {
  return feasibility_check(mechanism, instance);
}

CheckReport check_feasible(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance) {
  return feasibility_check(mechanism, instance);
}

CheckReport check_cost_monotone(const CostMechanism& mechanism, const ProductionCostInstance& instance,
                                std::span<const double> grid) {
  CheckReport report{Property::cost_monotone};
  std::vector<double> costs(grid.begin(), grid.end());
  std::sort(costs.begin(), costs.end());
  costs.erase(std::unique(costs.begin(), costs.end()), costs.end());
  const auto coins = mechanism.coins();
  for (std::size_t j = 0; j < instance.num_items(); ++j) {
    std::vector<ProductionCostInstance> variants;
    for (double c : costs) variants.push_back(instance.with_cost(j, c));
    enumerate_profiles(instance, [&](const Profile& profile, double) {
      for (const auto& [coin, weight] : coins) {
        std::vector<double> sold;
        for (const auto& variant : variants) sold.push_back(mechanism.run(variant, profile, coin).item_sold(j));
        for (std::size_t a = 0; a < costs.size(); ++a) {
          for (std::size_t b = a + 1; b < costs.size(); ++b) {
            const double gap = sold[b] - sold[a];
            if (gap > kTolerance) {
              std::ostringstream os;
              os << describe(profile) << " item " << j << " c=" << costs[a] << " sells " << sold[a] << " but c'="
                 << costs[b] << " sells " << sold[b] << coin_suffix(coin);
              report.add(os.str(), gap);
            }
          }
        }
      }
    });
  }
  return report;
}

double copies_opt(const ProductionCostInstance& instance) { return expected_profit(ItMechanism{}, instance).value; }

double expected_virtual_opt(const TwoSidedInstance& ts, const LpLimits& limits) {
  std::map<std::vector<double>, double> memo;
  double total = 0.0;
  enumerate_types(ts.sellers(), [&](std::span<const double> seller_values, double prob) {
    auto costs = virtual_costs(ts, seller_values);
    auto it = memo.find(costs);
    if (it == memo.end()) {
      const double value = opt_lp(ProductionCostInstance(ts.buyers(), costs), limits);
      it = memo.emplace(std::move(costs), value).first;
    }
    total += prob * it->second;
  });
  return total;
}

Lemma1Gap lemma1_gap(const TwoSidedInstance& ts, const LpLimits& limits) {
  Lemma1Gap gap{-std::numeric_limits<double>::infinity(), expected_virtual_opt(ts, limits), {}};
  const std::vector<std::shared_ptr<const CostMechanism>> bases{
      std::make_shared<ItMechanism>(), std::make_shared<BvcgMechanism>(), std::make_shared<OneLookaheadMechanism>(),
      std::make_shared<MixMechanism>()};
  for (const auto& base : bases) {
    const ReducedMechanism reduced(base);
    const double value = expected_profit(reduced, ts).value;
    if (value > gap.lhs) {
      gap.lhs = value;
      gap.best = reduced.name();
    }
  }
  return gap;
}

}  // namespace broker
