#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <broker/model.hpp>

namespace brokerctl {

using Instance = std::variant<broker::ProductionCostInstance, broker::TwoSidedInstance>;

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses an instance document; rejects unknown keys and invalid
/// distributions with broker::InputError.
Instance parse_instance(std::string_view text);

/// Canonical text form: fixed key order, shortest round-trip numbers.
std::string serialize(const Instance& instance);

/// Hex SHA-256 of the canonical serialization.
std::string digest(const Instance& instance);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const Instance& instance);

std::string_view kind_name(const Instance& instance);

}  // namespace brokerctl
