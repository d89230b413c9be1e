#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ichem/model.hpp"

namespace ichem {

// Model files are JSON objects:
//
//   {
//     "S0": 4.0,
//     "D": [0.18, 0.22],          // [lower, upper] or a bare number
//     "m1": 1.0, "delta1": 0.5, "sigma1": 0.1,
//     "m2": 0.6, "delta2": 0.5, "sigma2": 0.1, "sigma3": 0.1,
//     "jumps": [ {"weight": 0.5, "gamma1": -0.3, "gamma2": -0.3, "gamma3": -0.3} ]
//   }
//
// Optional keys: "name", "description", and "label" inside a jump record.
// Unknown keys are rejected. Structural problems throw ConfigError naming the
// field (or line/column for syntax errors); semantic problems such as a
// negative rate are left for validate().
ImpreciseModel parse_model(std::string_view text, std::string_view source = "<model>");
ImpreciseModel load_model(const std::filesystem::path& path);

std::string model_to_json(const ImpreciseModel& model);

} // namespace ichem
