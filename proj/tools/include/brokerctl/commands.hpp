#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <broker/oracle.hpp>

namespace brokerctl {

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kInputError = 2, kSizeGuard = 3, kIoError = 4 };

/// Named production-cost mechanisms; every entry also yields "reduced-<name>".
class Registry {
 public:
  using Factory = std::function<std::shared_ptr<const broker::CostMechanism>()>;

  static Registry standard();

  void add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }
  bool contains(const std::string& name) const { return factories_.contains(name); }
  std::shared_ptr<const broker::CostMechanism> make(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Factory> factories_;
};

/// Ordered key/value results plus check outcomes, printable as JSON or TSV.
class Report {
 public:
  using Value = std::variant<double, std::string, bool, std::int64_t>;

  explicit Report(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, Value value);
  void add_check(const broker::CheckReport& check, std::string scope = {});
  void add_verdict(const std::string& name, bool passed);

  bool all_passed() const;
  std::string json() const;
  std::string tsv() const;

 private:
  struct Check {
    std::string name;
    bool passed;
    std::uint64_t violations;
    std::vector<broker::Witness> witnesses;
  };
  std::string command_;
  std::vector<std::pair<std::string, Value>> values_;
  std::vector<Check> checks_;
};

/// Parses argv (program name first), runs one subcommand and returns its exit code.
int run_cli(const std::vector<std::string>& args, const Registry& registry, std::ostream& out, std::ostream& err);

}  // namespace brokerctl
