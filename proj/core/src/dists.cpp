#include "broker/dists.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "broker/errors.hpp"

namespace broker {

namespace {

constexpr double kProbSumTolerance = 1e-12;

void validate(const std::vector<double>& values, const std::vector<double>& probs) {
  if (values.empty()) throw InputError("distribution support is empty");
  if (values.size() != probs.size()) {
    throw InputError("distribution has " + std::to_string(values.size()) + " values but " +
                     std::to_string(probs.size()) + " probabilities");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) throw InputError("distribution value is not finite");
    if (!(probs[k] > 0.0) || probs[k] > 1.0) {
      std::ostringstream os;
      os << "probability " << probs[k] << " at value " << values[k] << " is outside (0,1]";
      throw InputError(os.str());
    }
    if (k > 0 && !(values[k] > values[k - 1])) {
      throw InputError("distribution values must be strictly increasing");
    }
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", expected 1";
    throw InputError(os.str());
  }
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> values, std::vector<double> probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
  validate(values_, probs_);
}

DiscreteDist DiscreteDist::canonical(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size()) {
    throw InputError("distribution values and probabilities differ in length");
  }
  std::vector<std::pair<double, double>> points;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (probs[k] < 0.0) throw InputError("negative probability");
    if (probs[k] > 0.0) points.emplace_back(values[k], probs[k]);
  }
  std::sort(points.begin(), points.end());
  std::vector<double> v;
  std::vector<double> p;
  for (const auto& [value, prob] : points) {
    if (!v.empty() && std::abs(value - v.back()) <= kTolerance) {
      p.back() += prob;
    } else {
      v.push_back(value);
      p.push_back(prob);
    }
  }
  // Merging can round a full mass to just above 1.
  for (double& x : p) x = std::min(x, 1.0);
  return DiscreteDist(std::move(v), std::move(p));
}

std::size_t DiscreteDist::index_of(double v) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), v - kTolerance);
  if (it != values_.end() && std::abs(*it - v) <= kTolerance) {
    return static_cast<std::size_t>(it - values_.begin());
  }
  return values_.size();
}

double DiscreteDist::tail(double v) const {
  double total = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    if (values_[k] >= v) total += probs_[k];
  }
  return total;
}

double DiscreteDist::mean() const {
  double total = 0.0;
  for (std::size_t k = 0; k < size(); ++k) total += values_[k] * probs_[k];
  return total;
}

double cdf(const DiscreteDist& dist, double v) {
  double total = 0.0;
  for (std::size_t k = 0; k < dist.size() && dist.value(k) <= v; ++k) total += dist.prob(k);
  return std::min(total, 1.0);
}

double VirtualTable::ironed_at(double v) const {
  for (const auto& point : points) {
    if (std::abs(point.value - v) <= kTolerance) return point.ironed;
  }
  std::ostringstream os;
  os << "value " << v << " is not in the support";
  throw InputError(os.str());
}

std::vector<double> iron(std::span<const double> slopes, std::span<const double> widths) {
  struct Block {
    double weight;
    double mean;
    std::size_t count;
  };
  std::vector<Block> stack;
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    stack.push_back({widths[k], slopes[k], 1});
    while (stack.size() >= 2 && stack[stack.size() - 2].mean > stack.back().mean) {
      Block top = stack.back();
      stack.pop_back();
      Block& below = stack.back();
      const double weight = below.weight + top.weight;
      below.mean = (below.mean * below.weight + top.mean * top.weight) / weight;
      below.weight = weight;
      below.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(slopes.size());
  for (const auto& block : stack) {
    if (block.count == 1) {
      out.push_back(slopes[out.size()]);
    } else {
      out.insert(out.end(), block.count, block.mean);
    }
  }
  return out;
}

VirtualTable buyer_virtual(const DiscreteDist& dist) {
  const std::size_t size = dist.size();
  std::vector<double> raw(size);
  double above = 0.0;  // Pr[X > v_k]
  for (std::size_t k = size; k-- > 0;) {
    const double v = dist.value(k);
    raw[k] = (k + 1 == size) ? v : v - (dist.value(k + 1) - v) * above / dist.prob(k);
    above += dist.prob(k);
  }
  const auto ironed = iron(raw, dist.probs());
  VirtualTable table{Side::buyer, {}};
  table.points.reserve(size);
  for (std::size_t k = 0; k < size; ++k) table.points.push_back({dist.value(k), raw[k], ironed[k]});
  return table;
}

VirtualTable seller_virtual(const DiscreteDist& dist) {
  const std::size_t size = dist.size();
  std::vector<double> raw(size);
  double below = 0.0;  // F(v_{k-1})
  for (std::size_t k = 0; k < size; ++k) {
    const double v = dist.value(k);
    raw[k] = (k == 0) ? v : v + (v - dist.value(k - 1)) * below / dist.prob(k);
    below += dist.prob(k);
  }
  const auto ironed = iron(raw, dist.probs());
  VirtualTable table{Side::seller, {}};
  table.points.reserve(size);
  for (std::size_t k = 0; k < size; ++k) table.points.push_back({dist.value(k), raw[k], ironed[k]});
  return table;
}

double upper_median(std::span<const double> values, std::span<const double> probs) {
  if (values.empty()) throw InputError("upper_median of an empty support");
  if (values.size() != probs.size()) throw InputError("upper_median: length mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  // Scan from the top; merge points equal within tolerance before testing.
  double tail = 0.0;
  for (std::size_t pos = 0; pos < order.size();) {
    const double v = values[order[pos]];
    while (pos < order.size() && v - values[order[pos]] <= kTolerance) {
      tail += probs[order[pos]];
      ++pos;
    }
    if (tail >= 0.5 - kTolerance) return v;
  }
  return values[order.back()];
}

double upper_median(const DiscreteDist& dist) { return upper_median(dist.values(), dist.probs()); }

MonopolyPrice monopoly_price(const DiscreteDist& dist, double floor, double cost, Floor rule) {
  std::vector<double> candidates;
  if (rule == Floor::inclusive) candidates.push_back(floor);
  for (double v : dist.values()) {
    if (v > floor || (rule == Floor::inclusive && v == floor)) candidates.push_back(v);
  }
  if (candidates.empty()) return {floor, 0.0};
  std::sort(candidates.begin(), candidates.end());
  MonopolyPrice best{candidates.front(), (candidates.front() - cost) * dist.tail(candidates.front())};
  for (double p : candidates) {
    const double rate = (p - cost) * dist.tail(p);
    if (rate > best.profit_rate + 1e-12) best = {p, rate};
  }
  return best;
}

}  // namespace broker
