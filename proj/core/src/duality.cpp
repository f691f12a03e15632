#include "broker/duality.hpp"

#include <algorithm>

#include "broker/errors.hpp"
#include "broker/mechanisms.hpp"

namespace broker {

namespace {

std::size_t type_index(const std::vector<DiscreteDist>& prior, std::span<const double> values) {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const std::size_t k = prior[j].index_of(values[j]);
    if (k >= prior[j].size()) throw InputError("type value is outside the support");
    idx = idx * prior[j].size() + k;
  }
  return idx;
}

std::vector<double> r_items(const ProductionCostInstance& instance, std::size_t buyer, const Matrix& opponents,
                            std::span<const double> beta) {
  std::vector<double> r(instance.num_items());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const Floor rule = beta_tie_below(opponents, buyer, j, beta[j]) ? Floor::exclusive : Floor::inclusive;
    r[j] = monopoly_price(instance.dist(buyer, j), beta[j], instance.cost(j), rule).profit_rate;
  }
  return r;
}

double sum(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total;
}

}  // namespace

double InterimForm::profit(std::span<const double> costs) const {
  double total = 0.0;
  for (const auto& buyer : buyers) {
    for (std::size_t t = 0; t < buyer.types.size(); ++t) {
      double value = buyer.p[t];
      for (std::size_t j = 0; j < costs.size(); ++j) value -= costs[j] * buyer.x(t, j);
      total += buyer.prob[t] * value;
    }
  }
  return total;
}

void enumerate_opponents(const ProductionCostInstance& instance, std::size_t buyer,
                         const std::function<void(const Matrix&, double)>& visit) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  std::vector<DiscreteDist> dists;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == buyer) continue;
    for (std::size_t j = 0; j < m; ++j) dists.push_back(instance.dist(i, j));
  }
  Matrix values(n, m);
  enumerate_types(dists, [&](std::span<const double> flat, double prob) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == buyer) continue;
      for (std::size_t j = 0; j < m; ++j) values(i, j) = flat[k++];
    }
    visit(values, prob);
  });
}

InterimForm interim_form(const CostMechanism& mechanism, const ProductionCostInstance& instance) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  InterimForm form;
  for (std::size_t i = 0; i < n; ++i) {
    InterimForm::Buyer b;
    enumerate_types(instance.buyers()[i], [&](std::span<const double> t, double prob) {
      b.types.emplace_back(t.begin(), t.end());
      b.prob.push_back(prob);
    });
    b.x = Matrix(b.types.size(), m);
    b.p.assign(b.types.size(), 0.0);
    form.buyers.push_back(std::move(b));
  }
  const auto coins = mechanism.coins();
  enumerate_profiles(instance, [&](const Profile& profile, double prob) {
    for (const auto& [coin, weight] : coins) {
      const Outcome out = mechanism.run(instance, profile, coin);
      for (std::size_t i = 0; i < n; ++i) {
        auto& b = form.buyers[i];
        const std::size_t t = type_index(instance.buyers()[i], profile.buyer_values.row(i));
        const double w = prob * weight;
        for (std::size_t j = 0; j < m; ++j) b.x(t, j) += w * out.buyer_alloc(i, j);
        b.p[t] += w * out.buyer_pay[i];
      }
    }
  });
  for (auto& b : form.buyers) {
    for (std::size_t t = 0; t < b.types.size(); ++t) {
      for (std::size_t j = 0; j < m; ++j) b.x(t, j) /= b.prob[t];
      b.p[t] /= b.prob[t];
    }
  }
  return form;
}

Region classify(std::span<const double> values, std::span<const double> beta) {
  double best = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) best = std::max(best, values[j] - beta[j]);
  if (best <= kTolerance) return {0};
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] - beta[j] >= best - kTolerance) return {j + 1};
  }
  return {0};
}

RTable compute_r(const ProductionCostInstance& instance) {
  const std::size_t n = instance.num_buyers();
  RTable table{0.0, std::vector<double>(n, 0.0), std::vector<std::vector<OpponentEntry>>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    enumerate_opponents(instance, i, [&](const Matrix& opponents, double prob) {
      auto beta = beta_row(opponents, i, instance.costs());
      auto r = r_items(instance, i, opponents, beta);
      const double ri = sum(r);
      table.per_buyer[i] += prob * ri;
      table.buyers[i].push_back({prob, std::move(beta), std::move(r), ri});
    });
    table.total += table.per_buyer[i];
  }
  return table;
}

DualityTerms compute_terms(const InterimForm& interim, const ProductionCostInstance& instance) {
  const std::size_t n = instance.num_buyers();
  const std::size_t m = instance.num_items();
  if (interim.buyers.size() != n) throw InputError("interim form does not match the instance");
  const RTable rt = compute_r(instance);
  DualityTerms terms{0.0, 0.0, 0.0, 0.0, 0.0, rt.total};

  for (std::size_t i = 0; i < n; ++i) {
    const auto& buyer = interim.buyers[i];
    const auto& opponents = rt.buyers[i];
    std::vector<VirtualTable> phis;
    for (std::size_t j = 0; j < m; ++j) phis.push_back(buyer_virtual(instance.dist(i, j)));

    for (std::size_t t = 0; t < buyer.types.size(); ++t) {
      const auto& v = buyer.types[t];
      std::vector<double> region_prob(m, 0.0);
      std::vector<double> under(m, 0.0);
      std::vector<double> over(m, 0.0);
      for (const auto& o : opponents) {
        const Region region = classify(v, o.beta);
        if (!region.is_zero()) region_prob[region.item()] += o.prob;
        for (std::size_t j = 0; j < m; ++j) {
          const double c = instance.cost(j);
          if (v[j] < o.beta[j] - kTolerance) {
            under[j] += o.prob * (v[j] - c);
          } else {
            over[j] += o.prob * (o.beta[j] - c);
          }
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        const double weight = buyer.prob[t] * buyer.x(t, j);
        if (weight == 0.0) continue;
        terms.single += weight * (phis[j].ironed_at(v[j]) - instance.cost(j)) * region_prob[j];
        terms.under += weight * under[j];
        terms.over += weight * over[j];
      }
    }

    for (const auto& o : opponents) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto& dist = instance.dist(i, j);
        for (std::size_t k = 0; k < dist.size(); ++k) {
          const double v = dist.value(k);
          const double s = v - o.beta[j];
          if (s < -kTolerance) continue;
          if (s > o.r + kTolerance) {
            // Pr[some other item has surplus at least s].
            double none = 1.0;
            for (std::size_t l = 0; l < m; ++l) {
              if (l == j) continue;
              const auto& other = instance.dist(i, l);
              double below = 0.0;
              for (std::size_t q = 0; q < other.size(); ++q) {
                if (other.value(q) - o.beta[l] < s - kTolerance) below += other.prob(q);
              }
              none *= below;
            }
            terms.tail += o.prob * dist.prob(k) * s * std::max(0.0, 1.0 - none);
          } else {
            terms.core += o.prob * dist.prob(k) * s;
          }
        }
      }
    }
  }
  return terms;
}

CoreEntry core_entry_quantities(const ProductionCostInstance& instance, std::size_t buyer, const Matrix& opponents) {
  const std::size_t m = instance.num_items();
  const auto beta = beta_row(opponents, buyer, instance.costs());
  const double r = sum(r_items(instance, buyer, opponents, beta));
  CoreEntry entry{{}, {}, -2.0 * r, r, 0.0};
  for (std::size_t j = 0; j < m; ++j) {
    const auto& dist = instance.dist(buyer, j);
    std::vector<double> b;
    std::vector<double> d;
    for (double v : dist.values()) {
      const double bv = v >= beta[j] - kTolerance ? std::max(0.0, v - beta[j]) : 0.0;
      b.push_back(bv);
      d.push_back(bv <= r + kTolerance ? bv : 0.0);
    }
    entry.e_hat += [&] {
      double mean = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) mean += dist.prob(k) * d[k];
      return mean;
    }();
    entry.b.push_back(DiscreteDist::canonical(std::move(b), dist.probs()));
    entry.d.push_back(DiscreteDist::canonical(std::move(d), dist.probs()));
  }
  enumerate_types(instance.buyers()[buyer], [&](std::span<const double> v, double prob) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += v[j] >= beta[j] - kTolerance ? std::max(0.0, v[j] - beta[j]) : 0.0;
    if (total >= entry.e_hat - kTolerance) entry.median_mass += prob;
  });
  return entry;
}

}  // namespace broker
