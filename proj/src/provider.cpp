#include <unordered_map>

#include "spex/errors.hpp"
#include "spex/io.hpp"
#include "spex/setfn.hpp"
#include "spex/synth.hpp"

namespace spex {

namespace {

template <class T>
T required(const nlohmann::json& spec, const char* key) {
  if (!spec.contains(key)) throw ConfigError(std::string("provider description lacks '") + key + "'");
  try {
    return spec.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("provider field '") + key + "': " + e.what());
  }
}

}  // namespace

std::size_t provider_batch_size(const nlohmann::json& spec) {
  const auto b = spec.value("batch", std::size_t{256});
  if (b == 0) throw ConfigError("provider batch size must be >= 1");
  return b;
}

std::shared_ptr<const ValueFunction> make_value_function(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("provider description must be a JSON object");
  const auto kind = required<std::string>(spec, "kind");

  if (kind == "table") {
    const auto n = required<std::size_t>(spec, "n");
    std::unordered_map<Mask, double, MaskHash> table;
    for (const auto& e : spec.at("entries")) {
      auto mask = io::mask_from_json(e.at("mask"), n);
      if (!table.emplace(std::move(mask), e.at("value").get<double>()).second)
        throw ConfigError("table lists a subset twice");
    }
    return std::make_shared<TableValueFunction>(n, std::move(table));
  }

  if (kind == "synthetic") {
    SyntheticSpec s;
    s.family = parse_family(required<std::string>(spec, "family"));
    s.n = required<std::size_t>(spec, "n");
    s.seed = spec.value("seed", std::uint64_t{0});
    s.num_sets = spec.value("num_sets", std::size_t{10});
    s.cardinality = spec.value("cardinality", std::size_t{5});
    return make_synthetic(s).vf;
  }

  if (kind == "external") {
    const auto n = required<std::size_t>(spec, "n");
    std::vector<std::string> argv{required<std::string>(spec, "cmd")};
    if (spec.contains("args"))
      for (const auto& a : spec.at("args")) argv.push_back(a.get<std::string>());
    return std::make_shared<ExternalValueFunction>(n, std::move(argv));
  }

  throw ConfigError("unknown provider kind '" + kind + "' (expected table, synthetic or external)");
}

}  // namespace spex
