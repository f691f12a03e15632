#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "broker/lp.hpp"
#include "broker/model.hpp"

namespace broker {

/// Largest instances the optimal-mechanism LP accepts.
struct LpLimits {
  std::size_t max_buyers = 3;
  std::size_t max_items = 3;
  std::uint64_t max_profiles = 10'000;
};

/// The LP-optimal mechanism as a lookup table over the instance's profiles.
class LpMechanism final : public CostMechanism {
 public:
  LpMechanism(ProductionCostInstance instance, std::vector<Outcome> table);

  std::string name() const override { return "lp-opt"; }
  /// Only valid for the instance it was solved on.
  Outcome run(const ProductionCostInstance& instance, const Profile& profile, const Coin& coin) const override;

 private:
  ProductionCostInstance instance_;
  std::vector<Outcome> table_;
};

struct LpOptimum {
  double value;
  lp::Certificate certificate;
  std::uint64_t pivots;
  std::shared_ptr<const LpMechanism> mechanism;
};

/// Maximum expected profit over randomized DSIC, IR, feasible mechanisms.
LpOptimum solve_opt_lp(const ProductionCostInstance& instance, const LpLimits& limits = {});
double opt_lp(const ProductionCostInstance& instance, const LpLimits& limits = {});

enum class Property { dsic_buyer, dsic_seller, ir, feasible, cost_monotone };
std::string to_string(Property property);

struct Witness {
  std::string description;
  double gap;
};

struct CheckReport {
  explicit CheckReport(Property p) : property(p) {}

  Property property;
  bool passed = true;
  std::uint64_t violations = 0;
  std::vector<Witness> witnesses;  // the first few violations

  void add(std::string description, double gap);
};

inline constexpr std::size_t kMaxWitnesses = 10;

CheckReport check_dsic(const CostMechanism& mechanism, const ProductionCostInstance& instance);
CheckReport check_dsic(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance, Side side);
CheckReport check_ir(const CostMechanism& mechanism, const ProductionCostInstance& instance);
CheckReport check_ir(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance);
CheckReport check_feasible(const CostMechanism& mechanism, const ProductionCostInstance& instance);
CheckReport check_feasible(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance);

/// Per item, per ordered grid pair c <= c' and per coin: the item is sold at
/// least as often under c as under c'.
CheckReport check_cost_monotone(const CostMechanism& mechanism, const ProductionCostInstance& instance,
                                std::span<const double> grid);

/// Optimum of the single-parameter copies instance, which M_IT attains.
double copies_opt(const ProductionCostInstance& instance);

struct Lemma1Gap {
  double lhs;  // best two-sided profit among the converted mechanisms
  double rhs;  // E_{v^S}[opt_lp(virtual-cost instance)]
  std::string best;
};

Lemma1Gap lemma1_gap(const TwoSidedInstance& ts, const LpLimits& limits = {});

/// Expected LP optimum over seller profiles, memoized by cost vector.
double expected_virtual_opt(const TwoSidedInstance& ts, const LpLimits& limits = {});

}  // namespace broker
