#pragma once

#include <string>

#include <json.hpp>

#include "cowm/network.hpp"

namespace cowm {

// Hex-float encoding: bit-faithful float64 round trips through JSON text.
std::string encode_double(double v);
double decode_double(const std::string& s);

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

// Versioned layer document: weights, bias, buffer entries, config, and the
// derived projection state so a round trip reproduces the layer exactly.
nlohmann::json to_json(const CowmLayer& layer);
CowmLayer layer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

// Exact state comparison (weights, bias, buffer, projection, config).
bool state_equal(const CowmLayer& a, const CowmLayer& b);
bool state_equal(const Mlp& a, const Mlp& b);

}  // namespace cowm
