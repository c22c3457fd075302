#ifndef TDVARMA_EXAMPLES_HPP
#define TDVARMA_EXAMPLES_HPP

#include <string>
#include <vector>

#include "tdvarma/config.hpp"

namespace tdvarma {

enum class ExampleId { example1_sim, example1_theory, example2, control_explosive };

const char* to_string(ExampleId id);
ExampleId example_from_string(const std::string& name);
std::vector<ExampleId> all_examples();

/// Shipped JSON text of the built-in configuration.
const std::string& example_config_text(ExampleId id);

Config build_config(ExampleId id);
Modeld build(ExampleId id);

/// example1_sim with both sine frequencies replaced by 2*pi/period.
Modeld build_example1_integer_period(int period = 25);

}  // namespace tdvarma

#endif  // TDVARMA_EXAMPLES_HPP
