#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "broker/dists.hpp"
#include "broker/matrix.hpp"

namespace broker {

/// Per-buyer priors: buyers[i][j] is the distribution of buyer i's value for item j.
using BuyerPriors = std::vector<std::vector<DiscreteDist>>;

/// One-sided market: the broker produces item j at public cost c_j.
class ProductionCostInstance {
 public:
  ProductionCostInstance(BuyerPriors buyers, std::vector<double> costs);

  const BuyerPriors& buyers() const { return buyers_; }
  const std::vector<double>& costs() const { return costs_; }
  const DiscreteDist& dist(std::size_t buyer, std::size_t item) const { return buyers_[buyer][item]; }
  double cost(std::size_t item) const { return costs_[item]; }
  std::size_t num_buyers() const { return buyers_.size(); }
  std::size_t num_items() const { return costs_.size(); }

  ProductionCostInstance with_cost(std::size_t item, double cost) const;

  friend bool operator==(const ProductionCostInstance&, const ProductionCostInstance&) = default;

 private:
  BuyerPriors buyers_;
  std::vector<double> costs_;
};

/// Two-sided market: seller j owns item j and holds a private value for it.
class TwoSidedInstance {
 public:
  TwoSidedInstance(BuyerPriors buyers, std::vector<DiscreteDist> sellers);

  const BuyerPriors& buyers() const { return buyers_; }
  const std::vector<DiscreteDist>& sellers() const { return sellers_; }
  const DiscreteDist& dist(std::size_t buyer, std::size_t item) const { return buyers_[buyer][item]; }
  const DiscreteDist& seller(std::size_t item) const { return sellers_[item]; }
  std::size_t num_buyers() const { return buyers_.size(); }
  std::size_t num_items() const { return sellers_.size(); }

  friend bool operator==(const TwoSidedInstance&, const TwoSidedInstance&) = default;

 private:
  BuyerPriors buyers_;
  std::vector<DiscreteDist> sellers_;
};

/// Reported values: buyer_values(i, j) = v^B_ij; seller values only in two-sided runs.
struct Profile {
  Matrix buyer_values;
  std::optional<std::vector<double>> seller_values;

  std::size_t num_buyers() const { return buyer_values.rows(); }
  std::size_t num_items() const { return buyer_values.cols(); }
};

/// Allocation and payments for one profile, in additive per-item form.
struct Outcome {
  Matrix buyer_alloc;               // x^B_ij
  std::vector<double> seller_sold;  // x^S_j
  std::vector<double> buyer_pay;    // p^B_i
  std::vector<double> seller_pay;   // p^S_j

  static Outcome empty(std::size_t buyers, std::size_t items);
  /// Sum over buyers of x^B_ij.
  double item_sold(std::size_t item) const;
};

bool check_feasible(const Outcome& outcome);

double profit(const ProductionCostInstance& instance, const Outcome& outcome);
double profit(const TwoSidedInstance& instance, const Outcome& outcome);

/// Realized value of a buyer under additive valuations: sum_j x_ij v_ij - p_i.
double buyer_utility(const Outcome& outcome, std::size_t buyer, std::span<const double> values);
double seller_utility(const Outcome& outcome, std::size_t item, double value);

enum class Branch : std::uint8_t { none, it, bvcg };

/// Explicit randomness record. Mechanisms are deterministic given the coin.
struct Coin {
  Branch branch = Branch::none;
  friend bool operator==(const Coin&, const Coin&) = default;
};

struct WeightedCoin {
  Coin coin;
  double weight;
};

std::string to_string(Branch branch);

template <class Instance>
class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual std::string name() const = 0;
  /// Finite coin space with probabilities summing to 1.
  virtual std::vector<WeightedCoin> coins() const { return {{Coin{}, 1.0}}; }
  virtual Outcome run(const Instance& instance, const Profile& profile, const Coin& coin) const = 0;
};

using CostMechanism = Mechanism<ProductionCostInstance>;
using TwoSidedMechanism = Mechanism<TwoSidedInstance>;

/// Default cap on enumerated profiles; BROKER_MAX_PROFILES overrides it.
inline constexpr std::uint64_t kDefaultProfileCap = 10'000'000;
std::uint64_t profile_cap();

/// Number of profiles in the product support (saturates at UINT64_MAX).
std::uint64_t profile_count(const BuyerPriors& buyers);
std::uint64_t profile_count(const ProductionCostInstance& instance);
std::uint64_t profile_count(const TwoSidedInstance& instance);

using ProfileVisitor = std::function<void(const Profile&, double)>;

/// Visits every profile of the product support with its probability, in
/// lexicographic order of support indices (last item of last buyer fastest,
/// seller values slowest). Throws SizeGuardError above `cap`.
void enumerate_profiles(const ProductionCostInstance& instance, const ProfileVisitor& visit,
                        std::uint64_t cap = profile_cap());
void enumerate_profiles(const TwoSidedInstance& instance, const ProfileVisitor& visit,
                        std::uint64_t cap = profile_cap());

/// Visits every joint value vector of one buyer's product prior.
void enumerate_types(const std::vector<DiscreteDist>& items,
                     const std::function<void(std::span<const double>, double)>& visit,
                     std::uint64_t cap = profile_cap());

struct Exact {};
struct MonteCarlo {
  std::uint64_t trials;
  std::uint64_t seed;
};
using EvalMode = std::variant<Exact, MonteCarlo>;

struct ProfitEstimate {
  double value;
  double std_error;  // 0 in exact mode
  std::uint64_t samples;
};

ProfitEstimate expected_profit(const CostMechanism& mechanism, const ProductionCostInstance& instance,
                               EvalMode mode = Exact{});
ProfitEstimate expected_profit(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance,
                               EvalMode mode = Exact{});

/// Per-trial generator seed: a pure function of (master seed, trial index).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

}  // namespace broker
