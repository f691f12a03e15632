#include "broker/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "broker/errors.hpp"

namespace broker {

namespace {

std::vector<VirtualTable> seller_tables(const TwoSidedInstance& ts) {
  std::vector<VirtualTable> tables;
  for (const auto& s : ts.sellers()) tables.push_back(seller_virtual(s));
  return tables;
}

double clamped_virtual(const VirtualTable& table, double value) { return std::max(0.0, table.ironed_at(value)); }

}  // namespace

std::vector<double> virtual_costs(const TwoSidedInstance& ts, std::span<const double> seller_values) {
  if (seller_values.size() != ts.num_items()) {
    throw InputError("expected " + std::to_string(ts.num_items()) + " seller values");
  }
  std::vector<double> costs(seller_values.size());
  for (std::size_t j = 0; j < costs.size(); ++j) {
    costs[j] = clamped_virtual(seller_virtual(ts.seller(j)), seller_values[j]);
  }
  return costs;
}

ProductionCostInstance to_cost_instance(const TwoSidedInstance& ts, std::span<const double> seller_values) {
  return ProductionCostInstance(ts.buyers(), virtual_costs(ts, seller_values));
}

Outcome convert(const CostMechanism& base, const TwoSidedInstance& ts, const Profile& profile, const Coin& coin) {
  if (!profile.seller_values) throw InputError("two-sided profile is missing seller values");
  const auto& sellers = *profile.seller_values;
  const auto tables = seller_tables(ts);
  std::vector<double> costs(ts.num_items());
  for (std::size_t j = 0; j < costs.size(); ++j) costs[j] = clamped_virtual(tables[j], sellers[j]);

  ProductionCostInstance ic(ts.buyers(), costs);
  Profile buyers_only{profile.buyer_values, std::nullopt};
  Outcome out = base.run(ic, buyers_only, coin);

  for (std::size_t j = 0; j < ts.num_items(); ++j) {
    const double sold = out.item_sold(j);
    out.seller_sold[j] = sold;
    out.seller_pay[j] = 0.0;
    if (sold <= kTolerance) continue;
    const auto& support = ts.seller(j);
    double threshold = sellers[j];
    for (std::size_t k = support.size(); k-- > 0;) {
      const double t = support.value(k);
      if (t < sellers[j]) break;
      const auto trial = base.run(ic.with_cost(j, clamped_virtual(tables[j], t)), buyers_only, coin);
      if (std::abs(trial.item_sold(j) - sold) <= kTolerance) {
        threshold = t;
        break;
      }
    }
    out.seller_pay[j] = sold * threshold;
  }
  return out;
}

double expected_virtual_profit(const CostMechanism& base, const TwoSidedInstance& ts) {
  double total = 0.0;
  enumerate_types(ts.sellers(), [&](std::span<const double> seller_values, double prob) {
    total += prob * expected_profit(base, to_cost_instance(ts, seller_values)).value;
  });
  return total;
}

SellerPaymentIdentity seller_payment_identity(const ReducedMechanism& mechanism, const TwoSidedInstance& ts) {
  const std::size_t m = ts.num_items();
  const auto tables = seller_tables(ts);
  const auto coins = mechanism.coins();
  SellerPaymentIdentity out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  enumerate_profiles(ts, [&](const Profile& profile, double prob) {
    for (const auto& [coin, weight] : coins) {
      const auto outcome = mechanism.run(ts, profile, coin);
      for (std::size_t j = 0; j < m; ++j) {
        const double phi = tables[j].ironed_at((*profile.seller_values)[j]);
        out.payments[j] += prob * weight * outcome.seller_pay[j];
        out.virtual_welfare[j] += prob * weight * outcome.seller_sold[j] * phi;
      }
    }
  });
  return out;
}

}  // namespace broker
