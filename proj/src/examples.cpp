#include "tdvarma/examples.hpp"

#include <json.hpp>

#include "tdvarma/errors.hpp"

namespace tdvarma {

namespace embedded {
extern const std::string example1_sim;
extern const std::string example1_theory;
extern const std::string example2;
extern const std::string control_explosive;
}  // namespace embedded

const char* to_string(ExampleId id) {
  switch (id) {
    case ExampleId::example1_sim: return "example1_sim";
    case ExampleId::example1_theory: return "example1_theory";
    case ExampleId::example2: return "example2";
    case ExampleId::control_explosive: return "control_explosive";
  }
  return "?";
}

ExampleId example_from_string(const std::string& name) {
  for (ExampleId id : all_examples())
    if (name == to_string(id)) return id;
  throw ConfigError("unknown example '" + name + "'");
}

std::vector<ExampleId> all_examples() {
  return {ExampleId::example1_sim, ExampleId::example1_theory, ExampleId::example2, ExampleId::control_explosive};
}

const std::string& example_config_text(ExampleId id) {
  switch (id) {
    case ExampleId::example1_sim: return embedded::example1_sim;
    case ExampleId::example1_theory: return embedded::example1_theory;
    case ExampleId::example2: return embedded::example2;
    case ExampleId::control_explosive: return embedded::control_explosive;
  }
  throw ContractError("bad example id");
}

Config build_config(ExampleId id) { return parse_config(example_config_text(id)); }

Modeld build(ExampleId id) { return build_config(id).model; }

Modeld build_example1_integer_period(int period) {
  auto doc = nlohmann::ordered_json::parse(example_config_text(ExampleId::example1_sim));
  auto& a = doc["model"]["A"][0];
  a[0][0]["omega"] = {{"two_pi_over", period}};
  a[1][1]["omega"] = {{"two_pi_over", period}};
  return parse_config(doc.dump()).model;
}

}  // namespace tdvarma
