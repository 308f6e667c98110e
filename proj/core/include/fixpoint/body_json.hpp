#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fixpoint/geometry.hpp"

namespace fixpoint {

/// Bodies serialize as {"variant":"lp_ball","n":8,"p":2,"R":1},
/// {"variant":"ellipsoid","semiaxes":[...]},
/// {"variant":"polytope","vertices":[[...],...]},
/// {"variant":"scaled","inner":{...},"lambda":2} and
/// {"variant":"intersection","a":{...},"b":{...}}. p may be the string "inf".
nlohmann::json body_to_json(const ConvexBody& body);
ConvexBody body_from_json(const nlohmann::json& j);
ConvexBody parse_body(const std::string& text);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace fixpoint
