#include "brokerctl/generate.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include <broker/errors.hpp>

namespace brokerctl {

namespace {

broker::DiscreteDist draw_dist(std::mt19937_64& rng, std::size_t support, int value_max) {
  std::uniform_int_distribution<int> pick(0, value_max);
  std::vector<double> values;
  for (std::size_t k = 0; k < support; ++k) values.push_back(pick(rng));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Symmetric Dirichlet(1) weights.
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    probs.push_back(std::max(gamma(rng), 1e-6));
    total += probs.back();
  }
  for (double& p : probs) p /= total;
  return broker::DiscreteDist(std::move(values), std::move(probs));
}

}  // namespace

Instance generate(const GenOptions& options, std::uint64_t index) {
  if (options.buyers == 0 || options.items == 0 || options.support == 0) {
    throw broker::InputError("buyers, items and support must be positive");
  }
  if (options.value_max < 0) throw broker::InputError("value-max must be non-negative");
  if (options.kind != "production-cost" && options.kind != "two-sided") {
    throw broker::InputError("unknown instance kind \"" + options.kind + "\"");
  }
  std::mt19937_64 rng(broker::trial_seed(options.seed, index));
  broker::BuyerPriors buyers(options.buyers);
  for (auto& buyer : buyers) {
    for (std::size_t j = 0; j < options.items; ++j) buyer.push_back(draw_dist(rng, options.support, options.value_max));
  }
  if (options.kind == "two-sided") {
    std::vector<broker::DiscreteDist> sellers;
    for (std::size_t j = 0; j < options.items; ++j) sellers.push_back(draw_dist(rng, options.support, options.value_max));
    return broker::TwoSidedInstance(std::move(buyers), std::move(sellers));
  }
  const int cost_max = options.cost_max < 0 ? options.value_max / 2 : options.cost_max;
  std::uniform_int_distribution<int> pick(0, cost_max);
  std::vector<double> costs;
  for (std::size_t j = 0; j < options.items; ++j) costs.push_back(pick(rng));
  return broker::ProductionCostInstance(std::move(buyers), std::move(costs));
}

std::string instance_filename(const GenOptions& options, std::uint64_t index) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s-seed%llu-%04llu.json", options.kind.c_str(),
                static_cast<unsigned long long>(options.seed), static_cast<unsigned long long>(index));
  return buf;
}

std::vector<std::filesystem::path> write_instances(const GenOptions& options, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (std::uint64_t k = 0; k < options.count; ++k) {
    auto path = dir / instance_filename(options, k);
    save_instance(path, generate(options, k));
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace brokerctl
