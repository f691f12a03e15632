#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <broker/mechanisms.hpp>
#include <broker/model.hpp>
#include <brokerctl/generate.hpp>

namespace fixtures {

inline broker::DiscreteDist coin02() { return broker::DiscreteDist({0, 2}, {0.5, 0.5}); }

/// One buyer, one item, values {0, 2} equally likely, cost 1.
inline broker::ProductionCostInstance single_item() { return broker::ProductionCostInstance({{coin02()}}, {1.0}); }

/// One buyer, two items, each {0, 2} equally likely, costs (1, 1).
inline broker::ProductionCostInstance two_items(double cost = 1.0) {
  return broker::ProductionCostInstance({{coin02(), coin02()}}, {cost, cost});
}

/// One buyer {0, 4}, one seller {1, 2}.
inline broker::TwoSidedInstance bilateral() {
  return broker::TwoSidedInstance({{broker::DiscreteDist({0, 4}, {0.5, 0.5})}},
                                  {broker::DiscreteDist({1, 2}, {0.5, 0.5})});
}

inline broker::Profile profile(std::vector<std::vector<double>> rows) {
  broker::Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return {m, std::nullopt};
}

inline broker::Profile profile(std::vector<std::vector<double>> rows, std::vector<double> sellers) {
  auto p = profile(std::move(rows));
  p.seller_values = std::move(sellers);
  return p;
}

/// Small random production-cost instances with varied shapes.
inline std::vector<broker::ProductionCostInstance> random_cost_instances(std::size_t count, std::uint64_t seed,
                                                                         std::size_t max_support = 3) {
  std::vector<broker::ProductionCostInstance> out;
  for (std::size_t k = 0; k < count; ++k) {
    brokerctl::GenOptions o;
    o.buyers = 1 + k % 2;
    o.items = 1 + (k / 2) % 2;
    o.support = 1 + (k / 4) % max_support;
    o.value_max = 10;
    o.seed = seed;
    out.push_back(std::get<broker::ProductionCostInstance>(brokerctl::generate(o, k)));
  }
  return out;
}

inline std::vector<broker::TwoSidedInstance> random_two_sided(std::size_t count, std::uint64_t seed,
                                                              std::size_t max_support = 3) {
  std::vector<broker::TwoSidedInstance> out;
  for (std::size_t k = 0; k < count; ++k) {
    brokerctl::GenOptions o;
    o.kind = "two-sided";
    o.buyers = 1 + k % 2;
    o.items = 1 + (k / 2) % 2;
    o.support = 1 + (k / 4) % max_support;
    o.value_max = 10;
    o.seed = seed;
    out.push_back(std::get<broker::TwoSidedInstance>(brokerctl::generate(o, k)));
  }
  return out;
}

inline std::vector<std::shared_ptr<const broker::CostMechanism>> shipped() {
  return {std::make_shared<broker::ItMechanism>(), std::make_shared<broker::BvcgMechanism>(),
          std::make_shared<broker::OneLookaheadMechanism>(), std::make_shared<broker::MixMechanism>()};
}

/// M_IT with first-price payments: winners pay their bid.
class FirstPriceIt final : public broker::CostMechanism {
 public:
  std::string name() const override { return "first-price-it"; }
  broker::Outcome run(const broker::ProductionCostInstance& instance, const broker::Profile& profile,
                      const broker::Coin&) const override {
    auto out = broker::run_it(instance, profile);
    for (std::size_t i = 0; i < instance.num_buyers(); ++i) {
      out.buyer_pay[i] = 0.0;
      for (std::size_t j = 0; j < instance.num_items(); ++j) {
        out.buyer_pay[i] += out.buyer_alloc(i, j) * profile.buyer_values(i, j);
      }
    }
    return out;
  }
};

/// Charges every buyer a fee of 1 whether or not it wins.
class FixedFee final : public broker::CostMechanism {
 public:
  std::string name() const override { return "fixed-fee"; }
  broker::Outcome run(const broker::ProductionCostInstance& instance, const broker::Profile&,
                      const broker::Coin&) const override {
    auto out = broker::Outcome::empty(instance.num_buyers(), instance.num_items());
    for (auto& p : out.buyer_pay) p = 1.0;
    return out;
  }
};

/// Gives buyer 0 each item whose cost is at least 1, for free.
class SellsWhenCostly final : public broker::CostMechanism {
 public:
  std::string name() const override { return "sells-when-costly"; }
  broker::Outcome run(const broker::ProductionCostInstance& instance, const broker::Profile&,
                      const broker::Coin&) const override {
    auto out = broker::Outcome::empty(instance.num_buyers(), instance.num_items());
    for (std::size_t j = 0; j < instance.num_items(); ++j) {
      if (instance.cost(j) >= 1.0) {
        out.buyer_alloc(0, j) = 1.0;
        out.seller_sold[j] = 1.0;
      }
    }
    return out;
  }
};

/// Allocates each item to every buyer with probability 0.6.
class Oversold final : public broker::CostMechanism {
 public:
  std::string name() const override { return "oversold"; }
  broker::Outcome run(const broker::ProductionCostInstance& instance, const broker::Profile&,
                      const broker::Coin&) const override {
    auto out = broker::Outcome::empty(instance.num_buyers(), instance.num_items());
    for (std::size_t i = 0; i < instance.num_buyers(); ++i) {
      for (std::size_t j = 0; j < instance.num_items(); ++j) out.buyer_alloc(i, j) = 0.6;
    }
    for (auto& s : out.seller_sold) s = 1.0;
    return out;
  }
};

}  // namespace fixtures
