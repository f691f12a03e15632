#include "broker/mechanisms.hpp"

#include <algorithm>
#include <limits>

#include "broker/errors.hpp"

namespace broker {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Lowest-index buyer with the highest ironed virtual, if it clears the cost.
std::size_t it_winner(std::span<const double> phis, double cost) {
  double best = -std::numeric_limits<double>::infinity();
  for (double phi : phis) best = std::max(best, phi);
  for (std::size_t i = 0; i < phis.size(); ++i) {
    if (phis[i] >= best - kTolerance) return phis[i] >= cost - kTolerance ? i : kNone;
  }
  return kNone;
}

double surplus(std::span<const double> values, std::span<const double> beta) {
  double total = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) total += std::max(0.0, values[j] - beta[j]);
  return total;
}

}  // namespace

std::vector<double> beta_row(const Matrix& values, std::size_t buyer, std::span<const double> costs) {
  std::vector<double> beta(costs.begin(), costs.end());
  for (std::size_t i = 0; i < values.rows(); ++i) {
    if (i == buyer) continue;
    for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = std::max(beta[j], values(i, j));
  }
  return beta;
}

std::vector<double> beta_matrix(const Matrix& opponents, std::span<const double> costs) {
  return beta_row(opponents, opponents.rows(), costs);
}

ReserveContext reserve_context(const Matrix& values, std::span<const double> costs) {
  const std::size_t n = values.rows();
  const std::size_t m = values.cols();
  ReserveContext ctx{Matrix(n, m), Matrix(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double p = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) p = std::max(p, values(k, j));
      }
      ctx.P(i, j) = p;
      ctx.beta(i, j) = std::max(p, costs[j]);
    }
  }
  return ctx;
}

double entry_fee(const std::vector<DiscreteDist>& prior, std::span<const double> beta) {
  std::vector<double> surpluses;
  std::vector<double> probs;
  enumerate_types(prior, [&](std::span<const double> t, double prob) {
    surpluses.push_back(surplus(t, beta));
    probs.push_back(prob);
  });
  return upper_median(surpluses, probs);
}

bool beta_tie_below(const Matrix& values, std::size_t buyer, std::size_t item, double beta) {
  for (std::size_t i = 0; i < buyer; ++i) {
    if (values(i, item) == beta) return true;
  }
  return false;
}

Outcome run_it(const ProductionCostInstance& instance, const Profile& profile) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  Outcome out = Outcome::empty(n, m);
  std::vector<double> phis(n);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<VirtualTable> tables;
    tables.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      tables.push_back(buyer_virtual(instance.dist(i, j)));
      phis[i] = tables.back().ironed_at(profile.buyer_values(i, j));
    }
    const double cost = instance.cost(j);
    const std::size_t w = it_winner(phis, cost);
    if (w == kNone) continue;
    // Threshold: the smallest report at which w still wins.
    const auto& table = tables[w];
    double price = profile.buyer_values(w, j);
    const double own = phis[w];
    for (std::size_t k = 0; k < table.size(); ++k) {
      phis[w] = table.ironed(k);
      if (it_winner(phis, cost) == w) {
        price = table.points[k].value;
        break;
      }
    }
    phis[w] = own;
    out.buyer_alloc(w, j) = 1.0;
    out.buyer_pay[w] += price;
    out.seller_sold[j] = 1.0;
  }
  return out;
}

Outcome run_bvcg(const ProductionCostInstance& instance, const Profile& profile) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  const Matrix& values = profile.buyer_values;
  const auto ctx = reserve_context(values, instance.costs());
  Outcome out = Outcome::empty(n, m);
  std::vector<bool> accepted(n, false);
  std::vector<double> fees(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    fees[i] = entry_fee(instance.buyers()[i], ctx.beta.row(i));
    accepted[i] = surplus(values.row(i), ctx.beta.row(i)) >= fees[i] - kTolerance;
    if (accepted[i]) out.buyer_pay[i] = fees[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (accepted[i] && values(i, j) >= ctx.beta(i, j) - kTolerance) {
        out.buyer_alloc(i, j) = 1.0;
        out.buyer_pay[i] += ctx.beta(i, j);
        out.seller_sold[j] = 1.0;
        break;
      }
    }
  }
  return out;
}

Outcome run_1la(const ProductionCostInstance& instance, const Profile& profile) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  const Matrix& values = profile.buyer_values;
  Outcome out = Outcome::empty(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t top = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (values(i, j) > values(top, j)) top = i;
    }
    const double beta = beta_row(values, top, instance.costs())[j];
    const bool exclusive = beta_tie_below(values, top, j, beta);
    const auto offer =
        monopoly_price(instance.dist(top, j), beta, instance.cost(j), exclusive ? Floor::exclusive : Floor::inclusive);
    const double v = values(top, j);
    if (v >= offer.price && (!exclusive || v > beta)) {
      out.buyer_alloc(top, j) = 1.0;
      out.buyer_pay[top] += offer.price;
      out.seller_sold[j] = 1.0;
    }
  }
  return out;
}

std::vector<WeightedCoin> mix_coins() { return {{Coin{Branch::it}, 0.75}, {Coin{Branch::bvcg}, 0.25}}; }

Outcome run_mix(const ProductionCostInstance& instance, const Profile& profile, const Coin& coin) {
  switch (coin.branch) {
    case Branch::it:
      return run_it(instance, profile);
    case Branch::bvcg:
      return run_bvcg(instance, profile);
    case Branch::none:
      break;
  }
  throw InputError("mixture mechanism needs a coin with a branch");
}

}  // namespace broker
