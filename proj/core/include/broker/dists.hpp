#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace broker {

/// Absolute tolerance used for probability and currency comparisons.
inline constexpr double kTolerance = 1e-9;

/// Finite discrete distribution over a strictly increasing support.
///
/// Values are immutable after construction. The validating constructor
/// rejects malformed input; `canonical` repairs it instead (sorts, merges
/// duplicate values and drops zero-probability points).
class DiscreteDist {
 public:
  DiscreteDist(std::vector<double> values, std::vector<double> probs);

  static DiscreteDist canonical(std::vector<double> values, std::vector<double> probs);
  static DiscreteDist point(double value) { return DiscreteDist({value}, {1.0}); }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return values_.size(); }

  double value(std::size_t k) const { return values_[k]; }
  double prob(std::size_t k) const { return probs_[k]; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  /// Index of `v` in the support (within kTolerance), or size() if absent.
  std::size_t index_of(double v) const;
  bool contains(double v) const { return index_of(v) < size(); }

  /// Pr[X >= v].
  double tail(double v) const;
  double mean() const;

  friend bool operator==(const DiscreteDist&, const DiscreteDist&) = default;

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
};

/// Pr[X <= v]; right-continuous step function.
double cdf(const DiscreteDist& dist, double v);

enum class Side { buyer, seller };

struct VirtualPoint {
  double value;
  double raw;
  double ironed;
};

struct VirtualTable {
  Side side;
  std::vector<VirtualPoint> points;

  std::size_t size() const { return points.size(); }
  /// Ironed virtual value at support index k.
  double ironed(std::size_t k) const { return points[k].ironed; }
  /// Ironed virtual value at support value v; throws if v is not a support point.
  double ironed_at(double v) const;
};

/// Buyer-side virtual values: phi(v_k) = v_k - (v_{k+1} - v_k) * Pr[X > v_k] / f(v_k),
/// phi(v_K) = v_K, ironed by the concave hull of the revenue curve.
VirtualTable buyer_virtual(const DiscreteDist& dist);

/// Seller-side virtual values: phi(v_k) = v_k + (v_k - v_{k-1}) * F(v_{k-1}) / f(v_k),
/// phi(v_1) = v_1, ironed by the convex hull of the cost curve.
VirtualTable seller_virtual(const DiscreteDist& dist);

/// Weighted pool-adjacent-violators: the non-decreasing sequence that is the
/// slope sequence of the convex hull of the piecewise-linear curve with the
/// given segment slopes and widths. Untouched where `slopes` is already monotone.
std::vector<double> iron(std::span<const double> slopes, std::span<const double> widths);

/// Largest support point e with Pr[X >= e] >= 1/2. Values need not be sorted
/// or distinct; probabilities must sum to 1.
double upper_median(std::span<const double> values, std::span<const double> probs);
double upper_median(const DiscreteDist& dist);

struct MonopolyPrice {
  double price;
  double profit_rate;
};

enum class Floor { inclusive, exclusive };

/// argmax over p in support U {floor}, p >= floor (p > floor when exclusive),
/// of (p - cost) * Pr[y >= p]; smallest maximizer wins ties. Returns
/// (floor, 0) when no candidate price exists.
MonopolyPrice monopoly_price(const DiscreteDist& dist, double floor, double cost,
                             Floor rule = Floor::inclusive);

}  // namespace broker
