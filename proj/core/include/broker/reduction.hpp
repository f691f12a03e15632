#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "broker/model.hpp"

namespace broker {

/// Ironed seller virtual values at the reported seller values, clamped at 0.
std::vector<double> virtual_costs(const TwoSidedInstance& ts, std::span<const double> seller_values);

/// The production-cost instance whose costs are the sellers' virtual costs.
ProductionCostInstance to_cost_instance(const TwoSidedInstance& ts, std::span<const double> seller_values);

/// Runs `base` on the virtual-cost instance and pays each seller the
/// threshold value at which its item stops being bought, for the same coin.
Outcome convert(const CostMechanism& base, const TwoSidedInstance& ts, const Profile& profile, const Coin& coin);

/// Two-sided mechanism obtained from a cost-monotone production-cost mechanism.
class ReducedMechanism final : public TwoSidedMechanism {
 public:
  explicit ReducedMechanism(std::shared_ptr<const CostMechanism> base) : base_(std::move(base)) {}

  std::string name() const override { return "reduced-" + base_->name(); }
  std::vector<WeightedCoin> coins() const override { return base_->coins(); }
  Outcome run(const TwoSidedInstance& ts, const Profile& profile, const Coin& coin) const override {
    return convert(*base_, ts, profile, coin);
  }
  const CostMechanism& base() const { return *base_; }

 private:
  std::shared_ptr<const CostMechanism> base_;
};

/// E_{v^S}[ PFT(base; virtual-cost instance) ], the right side of the profit identity.
double expected_virtual_profit(const CostMechanism& base, const TwoSidedInstance& ts);

struct SellerPaymentIdentity {
  std::vector<double> payments;          // E[p^S_j]
  std::vector<double> virtual_welfare;   // E[x^S_j * phi^S_j(v^S_j)]
};

/// Expected seller payments next to expected virtual cost of the items bought,
/// item by item, for a converted mechanism.
SellerPaymentIdentity seller_payment_identity(const ReducedMechanism& mechanism, const TwoSidedInstance& ts);

}  // namespace broker
