#include "brokerctl/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <broker/duality.hpp>
#include <broker/errors.hpp>
#include <broker/mechanisms.hpp>
#include <broker/reduction.hpp>
#include <json.hpp>

#include "brokerctl/generate.hpp"
#include "brokerctl/io.hpp"

namespace brokerctl {

namespace {

using broker::CheckReport;
using broker::CostMechanism;
using broker::ProductionCostInstance;
using broker::TwoSidedInstance;

constexpr std::string_view kReducedPrefix = "reduced-";
constexpr double kLpTolerance = 1e-6;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string verdict(bool passed) { return passed ? "PASS" : "FAIL"; }

std::uint64_t parse_count(const std::string& text, const char* what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(value >= 1.0) || value != std::floor(value) || value > 1e15) {
    throw broker::InputError(std::string(what) + " must be a positive integer, got \"" + text + "\"");
  }
  return static_cast<std::uint64_t>(value);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size() || !std::isfinite(v)) {
      throw broker::InputError("bad cost grid entry \"" + item + "\"");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw broker::InputError("cost grid is empty");
  return grid;
}

/// Seven evenly spaced points from 0 to the largest buyer value.
std::vector<double> default_grid(const broker::BuyerPriors& buyers) {
  double top = 0.0;
  for (const auto& buyer : buyers) {
    for (const auto& d : buyer) top = std::max(top, d.max());
  }
  std::vector<double> grid;
  for (int k = 0; k <= 6; ++k) grid.push_back(top * k / 6.0);
  return grid;
}

struct Resolved {
  std::shared_ptr<const CostMechanism> base;
  bool reduced;
};

Resolved resolve(const Registry& registry, const std::string& name, const Instance& instance) {
  const bool reduced = name.starts_with(kReducedPrefix);
  const std::string base = reduced ? name.substr(kReducedPrefix.size()) : name;
  if (!registry.contains(base)) throw broker::InputError("unknown mechanism \"" + name + "\"");
  const bool two_sided = std::holds_alternative<TwoSidedInstance>(instance);
  if (reduced && !two_sided) {
    throw broker::InputError("mechanism \"" + name + "\" needs a two-sided instance");
  }
  if (!reduced && two_sided) {
    throw broker::InputError("mechanism \"" + name + "\" needs a production-cost instance; use reduced-" + name);
  }
  return {registry.make(base), reduced};
}

void merge(CheckReport& into, const CheckReport& from, const std::string& prefix) {
  for (const auto& w : from.witnesses) {
    if (into.witnesses.size() < broker::kMaxWitnesses) into.witnesses.push_back({prefix + w.description, w.gap});
  }
  into.violations += from.violations;
  into.passed = into.passed && from.passed;
}

struct Common {
  std::string instance;
  std::string format = "json";
};

void emit(const Report& report, const std::string& format, std::ostream& out) {
  out << (format == "tsv" ? report.tsv() : report.json());
}

int cmd_profit(const Common& common, const std::string& mechanism, const std::string& mode, const std::string& trials,
               std::uint64_t seed, const Registry& registry, Report& report) {
  const Instance instance = load_instance(common.instance);
  const auto resolved = resolve(registry, mechanism, instance);
  report.set("instance_digest", digest(instance));
  report.set("mechanism", mechanism);
  report.set("mode", mode);

  broker::EvalMode eval = broker::Exact{};
  if (mode == "mc") eval = broker::MonteCarlo{parse_count(trials, "--trials"), seed};
  broker::ProfitEstimate estimate{};
  if (resolved.reduced) {
    const broker::ReducedMechanism reduced(resolved.base);
    estimate = broker::expected_profit(reduced, std::get<TwoSidedInstance>(instance), eval);
  } else {
    estimate = broker::expected_profit(*resolved.base, std::get<ProductionCostInstance>(instance), eval);
  }
  if (mode == "mc") {
    report.set("estimate", estimate.value);
    report.set("std_error", estimate.std_error);
    report.set("trials", static_cast<std::int64_t>(estimate.samples));
    report.set("seed", static_cast<std::int64_t>(seed));
  } else {
    report.set("profit", estimate.value);
    report.set("profiles", static_cast<std::int64_t>(estimate.samples));
  }
  return kOk;
}

int cmd_opt(const Common& common, const Registry& registry, Report& report) {
  const Instance instance = load_instance(common.instance);
  report.set("instance_digest", digest(instance));
  if (const auto* pc = std::get_if<ProductionCostInstance>(&instance)) {
    const auto opt = broker::solve_opt_lp(*pc);
    report.set("opt", opt.value);
    report.set("certificate_residual", opt.certificate.worst());
    report.set("pivots", static_cast<std::int64_t>(opt.pivots));
    return kOk;
  }
  const auto& ts = std::get<TwoSidedInstance>(instance);
  const auto gap = broker::lemma1_gap(ts);
  const broker::ReducedMechanism mix(registry.make("mix"));
  const double mix_profit = broker::expected_profit(mix, ts).value;
  report.set("lhs", gap.lhs);
  report.set("rhs", gap.rhs);
  report.set("best", gap.best);
  report.set("reduced_mix_profit", mix_profit);
  report.add_verdict("lemma1", gap.lhs <= gap.rhs + kLpTolerance);
  report.add_verdict("8-approx", 8.0 * mix_profit >= gap.rhs - kLpTolerance);
  return report.all_passed() ? kOk : kPropertyFailure;
}

int cmd_check(const Common& common, const std::string& mechanism, const std::string& property,
              const std::string& grid_text, const Registry& registry, Report& report) {
  static const std::set<std::string> kProperties{"dsic", "ir", "feasible", "cost-monotone", "all"};
  if (!kProperties.contains(property)) throw broker::InputError("unknown property \"" + property + "\"");
  const Instance instance = load_instance(common.instance);
  const auto resolved = resolve(registry, mechanism, instance);
  report.set("instance_digest", digest(instance));
  report.set("mechanism", mechanism);
  const bool all = property == "all";
  const auto wants = [&](const char* p) { return all || property == p; };

  std::vector<double> grid;
  if (wants("cost-monotone")) {
    grid = grid_text.empty() ? default_grid(std::visit([](const auto& i) { return i.buyers(); }, instance))
                             : parse_grid(grid_text);
  }

  if (!resolved.reduced) {
    const auto& pc = std::get<ProductionCostInstance>(instance);
    const auto& m = *resolved.base;
    if (wants("dsic")) report.add_check(broker::check_dsic(m, pc));
    if (wants("ir")) report.add_check(broker::check_ir(m, pc));
    if (wants("feasible")) report.add_check(broker::check_feasible(m, pc));
    if (wants("cost-monotone")) report.add_check(broker::check_cost_monotone(m, pc, grid));
  } else {
    const auto& ts = std::get<TwoSidedInstance>(instance);
    const broker::ReducedMechanism m(resolved.base);
    if (wants("dsic")) {
      report.add_check(broker::check_dsic(m, ts, broker::Side::buyer));
      report.add_check(broker::check_dsic(m, ts, broker::Side::seller));
    }
    if (wants("ir")) report.add_check(broker::check_ir(m, ts));
    if (wants("feasible")) report.add_check(broker::check_feasible(m, ts));
    if (wants("cost-monotone")) {
      CheckReport merged(broker::Property::cost_monotone);
      broker::enumerate_types(ts.sellers(), [&](std::span<const double> sellers, double) {
        std::ostringstream prefix;
        prefix << "s=[";
        for (std::size_t j = 0; j < sellers.size(); ++j) prefix << (j ? "," : "") << sellers[j];
        prefix << "] ";
        merge(merged, broker::check_cost_monotone(*resolved.base, broker::to_cost_instance(ts, sellers), grid),
              prefix.str());
      });
      report.add_check(merged);
    }
  }
  return report.all_passed() ? kOk : kPropertyFailure;
}

int cmd_bound(const Common& common, const std::string& mechanism, const Registry& registry, Report& report) {
  const Instance instance = load_instance(common.instance);
  const auto* pc = std::get_if<ProductionCostInstance>(&instance);
  if (!pc) throw broker::InputError("bound needs a production-cost instance");
  report.set("instance_digest", digest(instance));
  report.set("mechanism", mechanism);

  std::shared_ptr<const CostMechanism> m;
  double tol = broker::kTolerance;
  if (mechanism == "lp-opt") {
    m = broker::solve_opt_lp(*pc).mechanism;
    tol = kLpTolerance;
  } else {
    m = resolve(registry, mechanism, instance).base;
  }
  const auto interim = broker::interim_form(*m, *pc);
  const auto terms = broker::compute_terms(interim, *pc);
  const double pft = interim.profit(pc->costs());
  const double copies = broker::copies_opt(*pc);
  const double pft_bvcg = broker::expected_profit(broker::BvcgMechanism{}, *pc).value;
  const double pft_1la = broker::expected_profit(broker::OneLookaheadMechanism{}, *pc).value;
  double median = 1.0;
  for (std::size_t i = 0; i < pc->num_buyers(); ++i) {
    broker::enumerate_opponents(*pc, i, [&](const broker::Matrix& opponents, double) {
      median = std::min(median, broker::core_entry_quantities(*pc, i, opponents).median_mass);
    });
  }

  report.set("single", terms.single);
  report.set("under", terms.under);
  report.set("over", terms.over);
  report.set("tail", terms.tail);
  report.set("core", terms.core);
  report.set("r", terms.r);
  report.set("copies_opt", copies);
  report.set("pft", pft);
  report.set("pft_bvcg", pft_bvcg);
  report.set("pft_1la", pft_1la);
  report.set("min_median_mass", median);
  report.add_verdict("master", pft <= terms.sum() + tol);
  report.add_verdict("single", terms.single <= copies + tol);
  report.add_verdict("under", terms.under <= copies + tol);
  report.add_verdict("over", terms.over <= copies + tol);
  report.add_verdict("tail", terms.tail <= terms.r + tol);
  report.add_verdict("core", terms.core <= 2.0 * terms.r + 2.0 * pft_bvcg + tol);
  report.add_verdict("r-identity", std::abs(terms.r - pft_1la) <= broker::kTolerance);
  report.add_verdict("median", median >= 0.5 - broker::kTolerance);
  return report.all_passed() ? kOk : kPropertyFailure;
}

int cmd_gen(const GenOptions& options, const std::string& out_dir, Report& report) {
  const std::uint64_t positions = options.buyers * options.items * options.support;
  if (positions > 10'000) throw broker::SizeGuardError("buyers*items*support is above 10000");
  const auto paths = write_instances(options, out_dir);
  report.set("kind", options.kind);
  report.set("seed", static_cast<std::int64_t>(options.seed));
  report.set("count", static_cast<std::int64_t>(paths.size()));
  for (std::size_t k = 0; k < paths.size(); ++k) {
    report.set("file" + std::to_string(k), paths[k].filename().string());
  }
  return kOk;
}

}  // namespace

Registry Registry::standard() {
  Registry r;
  r.add("it", [] { return std::make_shared<broker::ItMechanism>(); });
  r.add("bvcg", [] { return std::make_shared<broker::BvcgMechanism>(); });
  r.add("1la", [] { return std::make_shared<broker::OneLookaheadMechanism>(); });
  r.add("mix", [] { return std::make_shared<broker::MixMechanism>(); });
  return r;
}

std::shared_ptr<const CostMechanism> Registry::make(const std::string& name) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw broker::InputError("unknown mechanism \"" + name + "\"");
  return it->second();
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, factory] : factories_) out.push_back(name);
  return out;
}

void Report::set(const std::string& key, Value value) {
  for (auto& [k, v] : values_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  values_.emplace_back(key, std::move(value));
}

void Report::add_check(const CheckReport& check, std::string scope) {
  std::string name = broker::to_string(check.property);
  if (!scope.empty()) name += ":" + scope;
  checks_.push_back({std::move(name), check.passed, check.violations, check.witnesses});
}

void Report::add_verdict(const std::string& name, bool passed) {
  checks_.push_back({name, passed, passed ? 0u : 1u, {}});
}

bool Report::all_passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
}

std::string Report::json() const {
  using json = nlohmann::ordered_json;
  json doc = json::object();
  doc["command"] = command_;
  json results = json::object();
  for (const auto& [key, value] : values_) {
    std::visit([&](const auto& v) { results[key] = v; }, value);
  }
  doc["results"] = std::move(results);
  json checks = json::array();
  for (const auto& c : checks_) {
    json node = json::object();
    node["name"] = c.name;
    node["status"] = verdict(c.passed);
    node["violations"] = c.violations;
    json witnesses = json::array();
    for (const auto& w : c.witnesses) witnesses.push_back(json{{"description", w.description}, {"gap", w.gap}});
    node["witnesses"] = std::move(witnesses);
    checks.push_back(std::move(node));
  }
  doc["checks"] = std::move(checks);
  return doc.dump(2) + "\n";
}

std::string Report::tsv() const {
  std::ostringstream os;
  os << "command\t" << command_ << "\n";
  for (const auto& [key, value] : values_) {
    os << key << "\t";
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            os << format_number(v);
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (v ? "true" : "false");
          } else {
            os << v;
          }
        },
        value);
    os << "\n";
  }
  for (const auto& c : checks_) {
    os << c.name << "\t" << verdict(c.passed) << "\t" << c.violations << "\n";
    for (const auto& w : c.witnesses) os << "witness\t" << c.name << "\t" << format_number(w.gap) << "\t" << w.description << "\n";
  }
  return os.str();
}

int run_cli(const std::vector<std::string>& args, const Registry& registry, std::ostream& out, std::ostream& err) {
  CLI::App app{"Broker mechanisms: profits, optimal-mechanism bounds and incentive checks"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_instance) {
    auto* opt = sub->add_option("--instance", common.instance, "Instance file");
    if (needs_instance) opt->required();
    sub->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "tsv"}));
  };

  std::string mechanism;
  std::string mode = "exact";
  std::string trials = "100000";
  std::uint64_t seed = 0;
  auto* profit = app.add_subcommand("profit", "Expected profit of a mechanism");
  add_common(profit, true);
  profit->add_option("--mechanism", mechanism, "it|bvcg|1la|mix or reduced-<name>")->required();
  profit->add_option("--mode", mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  profit->add_option("--trials", trials, "Monte Carlo trials");
  profit->add_option("--seed", seed, "Monte Carlo seed");

  auto* opt = app.add_subcommand("opt", "Optimal DSIC profit (production-cost) or the reduction bound (two-sided)");
  add_common(opt, true);

  std::string property = "all";
  std::string grid;
  auto* check = app.add_subcommand("check", "Exhaustive incentive, feasibility and cost-monotonicity checks");
  add_common(check, true);
  check->add_option("--mechanism", mechanism, "Mechanism name")->required();
  check->add_option("--property", property, "dsic|ir|feasible|cost-monotone|all");
  check->add_option("--grid", grid, "Comma-separated cost grid");

  auto* bound = app.add_subcommand("bound", "Duality upper-bound terms and lemma checks");
  add_common(bound, true);
  bound->add_option("--mechanism", mechanism, "Mechanism name or lp-opt")->required();

  GenOptions gen_options;
  std::string out_dir = ".";
  auto* gen = app.add_subcommand("gen", "Generate random instances");
  add_common(gen, false);
  gen->add_option("--kind", gen_options.kind)->check(CLI::IsMember({"production-cost", "two-sided"}));
  gen->add_option("--buyers", gen_options.buyers)->check(CLI::PositiveNumber);
  gen->add_option("--items", gen_options.items)->check(CLI::PositiveNumber);
  gen->add_option("--support", gen_options.support)->check(CLI::PositiveNumber);
  gen->add_option("--value-max", gen_options.value_max)->check(CLI::NonNegativeNumber);
  gen->add_option("--cost-max", gen_options.cost_max, "Largest production cost (default value-max/2)");
  gen->add_option("--count", gen_options.count)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_options.seed);
  gen->add_option("--out", out_dir, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  std::string echo;
  for (std::size_t k = 1; k < args.size(); ++k) echo += (k > 1 ? " " : "") + args[k];
  Report report(echo);
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    if (*profit) code = cmd_profit(common, mechanism, mode, trials, seed, registry, report);
    if (*opt) code = cmd_opt(common, registry, report);
    if (*check) code = cmd_check(common, mechanism, property, grid, registry, report);
    if (*bound) code = cmd_bound(common, mechanism, registry, report);
    if (*gen) code = cmd_gen(gen_options, out_dir, report);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const broker::InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const broker::SizeGuardError& e) {
    err << "error: " << e.what() << "\n";
    return kSizeGuard;
  } catch (const broker::InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kPropertyFailure;
  }
  emit(report, common.format, out);
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  err << "elapsed_ms\t" << format_number(elapsed) << "\n";
  return code;
}

}  // namespace brokerctl
