#pragma once

// JSON model files.
//
//   {"schema_version": 1, "n1": 0, "n2": 1, "n": 1,
//    "focus": [{"a": .., "b": ..}], "omega": [1.0], "lambda": [],
//    "H_star": [{"alpha": [3], "beta": [0], "re": 1.0, "im": 0.0}]}
//
// alpha are the x exponents and beta the y exponents of a real monomial.

#include <string>

#include <json.hpp>

#include "avint/spectrum.hpp"

namespace avint {

inline constexpr int kModelSchemaVersion = 1;

// Throws ModelError listing every problem found (structure and invariants).
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::ordered_json model_to_json(const ModelSpec& spec);

ModelSpec parse_model(const std::string& path);
ModelSpec parse_model_text(const std::string& text);

}  // namespace avint
