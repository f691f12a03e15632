#include "broker/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <random>
#include <thread>

#include "broker/errors.hpp"

namespace broker {

namespace {

void validate_buyers(const BuyerPriors& buyers, std::size_t items) {
  if (buyers.empty()) throw InputError("instance has no buyers");
  if (items == 0) throw InputError("instance has no items");
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    if (buyers[i].size() != items) {
      throw InputError("buyer " + std::to_string(i) + " has " + std::to_string(buyers[i].size()) +
                       " item distributions, expected " + std::to_string(items));
    }
  }
}

std::uint64_t saturating_product(const std::vector<const DiscreteDist*>& dists) {
  std::uint64_t count = 1;
  for (const auto* d : dists) {
    if (count > std::numeric_limits<std::uint64_t>::max() / d->size()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= d->size();
  }
  return count;
}

std::vector<const DiscreteDist*> flatten(const BuyerPriors& buyers) {
  std::vector<const DiscreteDist*> out;
  for (const auto& buyer : buyers) {
    for (const auto& d : buyer) out.push_back(&d);
  }
  return out;
}

void guard(std::uint64_t count, std::uint64_t cap) {
  if (count > cap) {
    throw SizeGuardError("profile space has " + std::to_string(count) + " points, above the cap of " +
                         std::to_string(cap) +
                         "; use Monte Carlo mode or raise BROKER_MAX_PROFILES");
  }
}

/// Odometer over the product of `dists`; calls visit(indices, prob).
template <class Visit>
void odometer(const std::vector<const DiscreteDist*>& dists, Visit&& visit) {
  std::vector<std::size_t> idx(dists.size(), 0);
  while (true) {
    double prob = 1.0;
    for (std::size_t k = 0; k < dists.size(); ++k) prob *= dists[k]->prob(idx[k]);
    visit(idx, prob);
    std::size_t k = dists.size();
    while (k > 0) {
      --k;
      if (++idx[k] < dists[k]->size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (dists.empty()) return;
  }
}

std::size_t sample_index(const DiscreteDist& dist, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < dist.size(); ++k) {
    acc += dist.prob(k);
    if (u < acc) return k;
  }
  return dist.size() - 1;
}

const Coin& sample_coin(const std::vector<WeightedCoin>& coins, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < coins.size(); ++k) {
    acc += coins[k].weight;
    if (u < acc) return coins[k].coin;
  }
  return coins.back().coin;
}

template <class Instance>
ProfitEstimate exact_profit(const Mechanism<Instance>& mechanism, const Instance& instance) {
  const auto coins = mechanism.coins();
  double total = 0.0;
  std::uint64_t samples = 0;
  enumerate_profiles(instance, [&](const Profile& profile, double prob) {
    for (const auto& [coin, weight] : coins) {
      total += prob * weight * profit(instance, mechanism.run(instance, profile, coin));
    }
    ++samples;
  });
  return {total, 0.0, samples};
}

constexpr std::uint64_t kChunk = 4096;

template <class Instance>
ProfitEstimate monte_carlo_profit(const Mechanism<Instance>& mechanism, const Instance& instance,
                                  MonteCarlo mc) {
  if (mc.trials == 0) throw InputError("Monte Carlo mode needs at least one trial");
  const auto coins = mechanism.coins();
  const auto buyer_dists = flatten(instance.buyers());
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  constexpr bool kTwoSided = std::is_same_v<Instance, TwoSidedInstance>;

  struct Sums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  auto run_chunk = [&](std::uint64_t begin, std::uint64_t end) {
    Sums s;
    Profile profile{Matrix(n, m), std::nullopt};
    if constexpr (kTwoSided) profile.seller_values = std::vector<double>(m);
    for (std::uint64_t t = begin; t < end; ++t) {
      std::mt19937_64 rng(trial_seed(mc.seed, t));
      auto uniform = [&] { return std::generate_canonical<double, 53>(rng); };
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const auto& d = instance.dist(i, j);
          profile.buyer_values(i, j) = d.value(sample_index(d, uniform()));
        }
      }
      if constexpr (kTwoSided) {
        for (std::size_t j = 0; j < m; ++j) {
          const auto& d = instance.seller(j);
          (*profile.seller_values)[j] = d.value(sample_index(d, uniform()));
        }
      }
      const Coin& coin = sample_coin(coins, uniform());
      const double value = profit(instance, mechanism.run(instance, profile, coin));
      s.sum += value;
      s.sum_sq += value * value;
    }
    return s;
  };

  // Fixed chunk boundaries and in-order merge keep results independent of the
  // number of worker threads.
  const std::uint64_t chunks = (mc.trials + kChunk - 1) / kChunk;
  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(std::thread::hardware_concurrency(), chunks));
  std::vector<Sums> partial(chunks);
  std::vector<std::future<void>> tasks;
  for (std::uint64_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::uint64_t c = w; c < chunks; c += workers) {
        partial[c] = run_chunk(c * kChunk, std::min(mc.trials, (c + 1) * kChunk));
      }
    }));
  }
  for (auto& task : tasks) task.get();
  Sums total;
  for (const auto& s : partial) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  const double count = static_cast<double>(mc.trials);
  const double mean = total.sum / count;
  const double var = mc.trials > 1 ? std::max(0.0, (total.sum_sq - count * mean * mean) / (count - 1)) : 0.0;
  return {mean, std::sqrt(var / count), mc.trials};
}

template <class Instance>
ProfitEstimate evaluate(const Mechanism<Instance>& mechanism, const Instance& instance, EvalMode mode) {
  if (const auto* mc = std::get_if<MonteCarlo>(&mode)) return monte_carlo_profit(mechanism, instance, *mc);
  return exact_profit(mechanism, instance);
}

}  // namespace

ProductionCostInstance::ProductionCostInstance(BuyerPriors buyers, std::vector<double> costs)
    : buyers_(std::move(buyers)), costs_(std::move(costs)) {
  validate_buyers(buyers_, costs_.size());
  for (double c : costs_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("production costs must be finite and non-negative");
  }
}

ProductionCostInstance ProductionCostInstance::with_cost(std::size_t item, double cost) const {
  auto costs = costs_;
  costs.at(item) = cost;
  return ProductionCostInstance(buyers_, std::move(costs));
}

TwoSidedInstance::TwoSidedInstance(BuyerPriors buyers, std::vector<DiscreteDist> sellers)
    : buyers_(std::move(buyers)), sellers_(std::move(sellers)) {
  validate_buyers(buyers_, sellers_.size());
}

Outcome Outcome::empty(std::size_t buyers, std::size_t items) {
  return Outcome{Matrix(buyers, items), std::vector<double>(items, 0.0), std::vector<double>(buyers, 0.0),
                 std::vector<double>(items, 0.0)};
}

double Outcome::item_sold(std::size_t item) const {
  double total = 0.0;
  for (std::size_t i = 0; i < buyer_alloc.rows(); ++i) total += buyer_alloc(i, item);
  return total;
}

bool check_feasible(const Outcome& outcome) {
  const std::size_t m = outcome.buyer_alloc.cols();
  for (std::size_t i = 0; i < outcome.buyer_alloc.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = outcome.buyer_alloc(i, j);
      if (x < -kTolerance || x > 1.0 + kTolerance) return false;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double sold = j < outcome.seller_sold.size() ? outcome.seller_sold[j] : 0.0;
    if (sold < -kTolerance || sold > 1.0 + kTolerance) return false;
    if (outcome.item_sold(j) > sold + kTolerance) return false;
  }
  return true;
}

double profit(const ProductionCostInstance& instance, const Outcome& outcome) {
  double total = 0.0;
  for (double p : outcome.buyer_pay) total += p;
  for (std::size_t j = 0; j < instance.num_items(); ++j) total -= instance.cost(j) * outcome.item_sold(j);
  return total;
}

double profit(const TwoSidedInstance&, const Outcome& outcome) {
  double total = 0.0;
  for (double p : outcome.buyer_pay) total += p;
  for (double p : outcome.seller_pay) total -= p;
  return total;
}

double buyer_utility(const Outcome& outcome, std::size_t buyer, std::span<const double> values) {
  double u = -outcome.buyer_pay[buyer];
  for (std::size_t j = 0; j < values.size(); ++j) u += outcome.buyer_alloc(buyer, j) * values[j];
  return u;
}

double seller_utility(const Outcome& outcome, std::size_t item, double value) {
  return outcome.seller_pay[item] - value * outcome.seller_sold[item];
}

std::string to_string(Branch branch) {
  switch (branch) {
    case Branch::it:
      return "it";
    case Branch::bvcg:
      return "bvcg";
    case Branch::none:
      break;
  }
  return "none";
}

std::uint64_t profile_cap() {
  if (const char* env = std::getenv("BROKER_MAX_PROFILES")) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return value;
  }
  return kDefaultProfileCap;
}

std::uint64_t profile_count(const BuyerPriors& buyers) { return saturating_product(flatten(buyers)); }
std::uint64_t profile_count(const ProductionCostInstance& instance) { return profile_count(instance.buyers()); }
std::uint64_t profile_count(const TwoSidedInstance& instance) {
  auto dists = flatten(instance.buyers());
  for (const auto& s : instance.sellers()) dists.push_back(&s);
  return saturating_product(dists);
}

void enumerate_profiles(const ProductionCostInstance& instance, const ProfileVisitor& visit, std::uint64_t cap) {
  guard(profile_count(instance), cap);
  const auto dists = flatten(instance.buyers());
  const std::size_t m = instance.num_items();
  Profile profile{Matrix(instance.num_buyers(), m), std::nullopt};
  odometer(dists, [&](const std::vector<std::size_t>& idx, double prob) {
    for (std::size_t k = 0; k < idx.size(); ++k) profile.buyer_values(k / m, k % m) = dists[k]->value(idx[k]);
    visit(profile, prob);
  });
}

void enumerate_profiles(const TwoSidedInstance& instance, const ProfileVisitor& visit, std::uint64_t cap) {
  guard(profile_count(instance), cap);
  std::vector<const DiscreteDist*> dists;
  for (const auto& s : instance.sellers()) dists.push_back(&s);
  const std::size_t m = instance.num_items();
  for (const auto* d : flatten(instance.buyers())) dists.push_back(d);
  Profile profile{Matrix(instance.num_buyers(), m), std::vector<double>(m)};
  odometer(dists, [&](const std::vector<std::size_t>& idx, double prob) {
    for (std::size_t j = 0; j < m; ++j) (*profile.seller_values)[j] = dists[j]->value(idx[j]);
    for (std::size_t k = m; k < idx.size(); ++k) {
      profile.buyer_values((k - m) / m, (k - m) % m) = dists[k]->value(idx[k]);
    }
    visit(profile, prob);
  });
}

void enumerate_types(const std::vector<DiscreteDist>& items,
                     const std::function<void(std::span<const double>, double)>& visit, std::uint64_t cap) {
  std::vector<const DiscreteDist*> dists;
  for (const auto& d : items) dists.push_back(&d);
  guard(saturating_product(dists), cap);
  std::vector<double> values(items.size());
  odometer(dists, [&](const std::vector<std::size_t>& idx, double prob) {
    for (std::size_t k = 0; k < idx.size(); ++k) values[k] = dists[k]->value(idx[k]);
    visit(values, prob);
  });
}

ProfitEstimate expected_profit(const CostMechanism& mechanism, const ProductionCostInstance& instance,
                               EvalMode mode) {
  return evaluate(mechanism, instance, mode);
}

ProfitEstimate expected_profit(const TwoSidedMechanism& mechanism, const TwoSidedInstance& instance,
                               EvalMode mode) {
  return evaluate(mechanism, instance, mode);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace broker
