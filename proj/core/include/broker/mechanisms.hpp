#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "broker/model.hpp"

namespace broker {

/// Opposing-bid maxima and reserves seen by each buyer for one profile.
struct ReserveContext {
  Matrix P;     // max_{i' != i} v_{i'j}, 0 when there is a single buyer
  Matrix beta;  // max(P_ij, c_j)
};

ReserveContext reserve_context(const Matrix& values, std::span<const double> costs);

/// Reserves for buyer i; row i of `values` is ignored.
std::vector<double> beta_row(const Matrix& values, std::size_t buyer, std::span<const double> costs);

/// Componentwise max of opposing bids (one row per opponent) and costs.
std::vector<double> beta_matrix(const Matrix& opponents, std::span<const double> costs);

/// Upper median of sum_j (t_j - beta_j)^+ with t drawn from the buyer's prior.
double entry_fee(const std::vector<DiscreteDist>& prior, std::span<const double> beta);

/// Whether a lower-index buyer bids exactly beta on `item`, in which case a
/// report equal to beta loses the tie and the 1-lookahead price must exceed it.
bool beta_tie_below(const Matrix& values, std::size_t buyer, std::size_t item, double beta);

Outcome run_it(const ProductionCostInstance& instance, const Profile& profile);
Outcome run_bvcg(const ProductionCostInstance& instance, const Profile& profile);
Outcome run_1la(const ProductionCostInstance& instance, const Profile& profile);
Outcome run_mix(const ProductionCostInstance& instance, const Profile& profile, const Coin& coin);

/// Mixture weights: Pr[IT] = 3/4, Pr[BVCG] = 1/4.
std::vector<WeightedCoin> mix_coins();

class ItMechanism final : public CostMechanism {
 public:
  std::string name() const override { return "it"; }
  Outcome run(const ProductionCostInstance& instance, const Profile& profile, const Coin&) const override {
    return run_it(instance, profile);
  }
};

class BvcgMechanism final : public CostMechanism {
 public:
  std::string name() const override { return "bvcg"; }
  Outcome run(const ProductionCostInstance& instance, const Profile& profile, const Coin&) const override {
    return run_bvcg(instance, profile);
  }
};

class OneLookaheadMechanism final : public CostMechanism {
 public:
  std::string name() const override { return "1la"; }
  Outcome run(const ProductionCostInstance& instance, const Profile& profile, const Coin&) const override {
    return run_1la(instance, profile);
  }
};

class MixMechanism final : public CostMechanism {
 public:
  std::string name() const override { return "mix"; }
  std::vector<WeightedCoin> coins() const override { return mix_coins(); }
  Outcome run(const ProductionCostInstance& instance, const Profile& profile, const Coin& coin) const override {
    return run_mix(instance, profile, coin);
  }
};

/// Never trades.
class NullMechanism final : public CostMechanism {
 public:
  std::string name() const override { return "null"; }
  Outcome run(const ProductionCostInstance& instance, const Profile&, const Coin&) const override {
    return Outcome::empty(instance.num_buyers(), instance.num_items());
  }
};

}  // namespace broker
