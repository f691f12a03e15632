#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brokerctl/io.hpp"

namespace brokerctl {

struct GenOptions {
  std::string kind = "production-cost";
  std::size_t buyers = 2;
  std::size_t items = 2;
  std::size_t support = 3;
  int value_max = 10;
  int cost_max = -1;  // production costs in [0, cost_max]; negative means value_max / 2
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

/// Instance `index` of the stream identified by the options' seed.
Instance generate(const GenOptions& options, std::uint64_t index);

/// File name embedding kind, seed and index.
std::string instance_filename(const GenOptions& options, std::uint64_t index);

/// Writes options.count instances under `dir`; returns the written paths.
std::vector<std::filesystem::path> write_instances(const GenOptions& options, const std::filesystem::path& dir);

}  // namespace brokerctl
