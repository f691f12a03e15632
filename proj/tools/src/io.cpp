#include "brokerctl/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <broker/errors.hpp>
#include <json.hpp>

namespace brokerctl {

namespace {

using json = nlohmann::ordered_json;
using broker::InputError;

constexpr std::string_view kProductionCost = "production-cost";
constexpr std::string_view kTwoSided = "two-sided";

void reject_unknown(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw InputError("unknown key \"" + key + "\" in " + where);
  }
}

const json& require(const json& object, const std::string& key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) throw InputError("missing key \"" + key + "\" in " + where);
  return *it;
}

std::vector<double> numbers(const json& array, const std::string& where) {
  if (!array.is_array()) throw InputError(where + " must be an array");
  std::vector<double> out;
  for (const auto& v : array) {
    if (!v.is_number()) throw InputError(where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

broker::DiscreteDist parse_dist(const json& node, const std::string& where) {
  if (!node.is_object()) throw InputError(where + " must be an object");
  reject_unknown(node, {"values", "probs"}, where);
  try {
    return broker::DiscreteDist(numbers(require(node, "values", where), where + ".values"),
                                numbers(require(node, "probs", where), where + ".probs"));
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

std::vector<broker::DiscreteDist> parse_dists(const json& node, const std::string& where) {
  if (!node.is_array()) throw InputError(where + " must be an array");
  std::vector<broker::DiscreteDist> out;
  for (std::size_t k = 0; k < node.size(); ++k) out.push_back(parse_dist(node[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

json dist_json(const broker::DiscreteDist& d) {
  json node = json::object();
  node["values"] = d.values();
  node["probs"] = d.probs();
  return node;
}

json buyers_json(const broker::BuyerPriors& buyers) {
  json out = json::array();
  for (const auto& buyer : buyers) {
    json row = json::array();
    for (const auto& d : buyer) row.push_back(dist_json(d));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed instance document: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("instance document must be an object");
  const auto& kind_node = require(doc, "kind", "instance");
  if (!kind_node.is_string()) throw InputError("\"kind\" must be a string");
  const auto kind = kind_node.get<std::string>();

  const auto& buyers_node = require(doc, "buyers", "instance");
  if (!buyers_node.is_array()) throw InputError("\"buyers\" must be an array");
  broker::BuyerPriors buyers;
  for (std::size_t i = 0; i < buyers_node.size(); ++i) {
    buyers.push_back(parse_dists(buyers_node[i], "buyers[" + std::to_string(i) + "]"));
  }

  if (kind == kProductionCost) {
    reject_unknown(doc, {"kind", "buyers", "costs"}, "instance");
    return broker::ProductionCostInstance(std::move(buyers), numbers(require(doc, "costs", "instance"), "costs"));
  }
  if (kind == kTwoSided) {
    reject_unknown(doc, {"kind", "buyers", "sellers"}, "instance");
    return broker::TwoSidedInstance(std::move(buyers), parse_dists(require(doc, "sellers", "instance"), "sellers"));
  }
  throw InputError("unknown instance kind \"" + kind + "\"");
}

std::string serialize(const Instance& instance) {
  json doc = json::object();
  doc["kind"] = std::string(kind_name(instance));
  std::visit(
      [&](const auto& inst) {
        doc["buyers"] = buyers_json(inst.buyers());
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, broker::ProductionCostInstance>) {
          doc["costs"] = inst.costs();
        } else {
          json sellers = json::array();
          for (const auto& s : inst.sellers()) sellers.push_back(dist_json(s));
          doc["sellers"] = std::move(sellers);
        }
      },
      instance);
  return doc.dump(2) + "\n";
}

std::string digest(const Instance& instance) {
  const std::string text = serialize(instance);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(kHex[md[k] >> 4]);
    out.push_back(kHex[md[k] & 0xF]);
  }
  return out;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return parse_instance(buffer.str());
}

void save_instance(const std::filesystem::path& path, const Instance& instance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize(instance);
  if (!out) throw IoError("cannot write " + path.string());
}

std::string_view kind_name(const Instance& instance) {
  return std::holds_alternative<broker::ProductionCostInstance>(instance) ? kProductionCost : kTwoSided;
}

}  // namespace brokerctl
