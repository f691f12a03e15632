#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "broker/model.hpp"

namespace broker {

/// Interim allocation and payment of each buyer type, averaged over the
/// other buyers and the coin. Types follow enumerate_types order.
struct InterimForm {
  struct Buyer {
    std::vector<std::vector<double>> types;
    std::vector<double> prob;  // D_i(v_i)
    Matrix x;                  // types x items
    std::vector<double> p;
  };
  std::vector<Buyer> buyers;

  /// Expected profit implied by the interim form under the given costs.
  double profit(std::span<const double> costs) const;
};

InterimForm interim_form(const CostMechanism& mechanism, const ProductionCostInstance& instance);

/// Region of a buyer type against fixed opponents: 0 for R0, j + 1 for R_j.
struct Region {
  std::size_t label;
  bool is_zero() const { return label == 0; }
  std::size_t item() const { return label - 1; }
  friend bool operator==(const Region&, const Region&) = default;
};

Region classify(std::span<const double> values, std::span<const double> beta);

/// One opponent sub-profile t_{-i} of buyer i with its reserve quantities.
struct OpponentEntry {
  double prob;
  std::vector<double> beta;
  std::vector<double> r_items;  // r_ij(t_{-i})
  double r;                     // r_i(t_{-i})
};

struct RTable {
  double total;
  std::vector<double> per_buyer;                   // r_i
  std::vector<std::vector<OpponentEntry>> buyers;  // per buyer, opponents in enumeration order
};

/// Monopoly profit above the reserves. A report equal to beta that loses the
/// lowest-index tie cannot be served at beta, so such prices are excluded.
RTable compute_r(const ProductionCostInstance& instance);

struct DualityTerms {
  double single;
  double under;
  double over;
  double tail;
  double core;
  double r;

  double sum() const { return single + under + over + tail + core; }
};

DualityTerms compute_terms(const InterimForm& interim, const ProductionCostInstance& instance);

struct CoreEntry {
  std::vector<DiscreteDist> b;  // per item
  std::vector<DiscreteDist> d;  // per item
  double e_hat;
  double r;                     // r_i(t_{-i})
  double median_mass;           // Pr[sum_j b_ij >= e_hat]
};

/// `opponents` holds every buyer's values; row `buyer` is ignored.
CoreEntry core_entry_quantities(const ProductionCostInstance& instance, std::size_t buyer, const Matrix& opponents);

/// Visits every opponent sub-profile of `buyer`; row `buyer` of the matrix is zero.
void enumerate_opponents(const ProductionCostInstance& instance, std::size_t buyer,
                         const std::function<void(const Matrix&, double)>& visit);

}  // namespace broker
