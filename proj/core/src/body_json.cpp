#include "fixpoint/body_json.hpp"

#include <cmath>
#include <limits>

#include "fixpoint/error.hpp"

namespace fixpoint {

using nlohmann::json;

namespace {

double exponent_from_json(const json& j) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    throw InvalidArgument("body: p must be a number or \"inf\", got \"" + text + "\"");
  }
  if (!j.is_number()) throw InvalidArgument("body: p must be a number or \"inf\"");
  return j.get<double>();
}

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw InvalidArgument(std::string("body: missing field \"") + name + "\"");
  return j.at(name);
}

}  // namespace

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument("expected a JSON array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json body_to_json(const ConvexBody& body) {
  return std::visit(
      [](const auto& shape) -> json {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, LpBall>) {
          json p = std::isinf(shape.p) ? json("inf") : json(shape.p);
          return {{"variant", "lp_ball"}, {"n", shape.n}, {"p", p}, {"R", shape.radius}};
        } else if constexpr (std::is_same_v<T, Ellipsoid>) {
          return {{"variant", "ellipsoid"}, {"semiaxes", vector_to_json(shape.semiaxes)}};
        } else if constexpr (std::is_same_v<T, Polytope>) {
          json vertices = json::array();
          for (Eigen::Index k = 0; k < shape.vertices.cols(); ++k) vertices.push_back(vector_to_json(shape.vertices.col(k)));
          return {{"variant", "polytope"}, {"vertices", vertices}};
        } else if constexpr (std::is_same_v<T, Scaled>) {
          return {{"variant", "scaled"}, {"inner", body_to_json(shape.inner)}, {"lambda", shape.factor}};
        } else {
          return {{"variant", "intersection"}, {"a", body_to_json(shape.first)}, {"b", body_to_json(shape.second)}};
        }
      },
      body.node().shape);
}

ConvexBody body_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("body: expected a JSON object");
  const auto variant = field(j, "variant").get<std::string>();
  try {
    if (variant == "lp_ball") {
      const double radius = j.contains("R") ? j.at("R").get<double>() : 1.0;
      return ConvexBody::lp_ball(field(j, "n").get<int>(), exponent_from_json(field(j, "p")), radius);
    }
    if (variant == "ellipsoid") return ConvexBody::ellipsoid(vector_from_json(field(j, "semiaxes")));
    if (variant == "polytope") {
      std::vector<Vector> vertices;
      for (const auto& v : field(j, "vertices")) vertices.push_back(vector_from_json(v));
      return ConvexBody::polytope(vertices);
    }
    if (variant == "scaled")
      return ConvexBody::scaled(body_from_json(field(j, "inner")), field(j, "lambda").get<double>());
    if (variant == "intersection")
      return ConvexBody::intersection(body_from_json(field(j, "a")), body_from_json(field(j, "b")));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("body: ") + e.what());
  }
  throw InvalidArgument("body: unknown variant \"" + variant + "\"");
}

ConvexBody parse_body(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("body: invalid JSON: ") + e.what());
  }
  return body_from_json(j);
}

}  // namespace fixpoint
