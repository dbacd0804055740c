#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <utility>

#include "lie_algebra.hpp"

namespace srprofile {

/**
 * Serialized form: {"dim": n, "weights": [...], "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1.0}}, ...]}
 *
 * Indices are 1-based and only i < j pairs are listed; loading restores the antisymmetric
 * partner. "labels" is optional.
 */
inline nlohmann::json to_json(const LieAlgebra& alg, const Grading& g)
{
  nlohmann::json brackets = nlohmann::json::array();
  const int n = alg.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      nlohmann::json coeffs = nlohmann::json::object();
      for (int k = 0; k < n; ++k) {
        if (alg(i, j, k) != 0.0) { coeffs[std::to_string(k + 1)] = alg(i, j, k); }
      }
      if (!coeffs.empty()) { brackets.push_back({{"i", i + 1}, {"j", j + 1}, {"coeffs", coeffs}}); }
    }
  }
  nlohmann::json out{{"dim", n}, {"weights", g.weights}, {"brackets", brackets}};
  if (!alg.labels().empty()) { out["labels"] = alg.labels(); }
  return out;
}

inline std::pair<LieAlgebra, Grading> lie_algebra_from_json(const nlohmann::json& doc)
{
  try {
    const int n = doc.at("dim").get<int>();
    std::vector<std::string> labels;
    if (doc.contains("labels")) { labels = doc.at("labels").get<std::vector<std::string>>(); }
    LieAlgebra alg(n, labels);
    Grading g = doc.contains("weights") ? Grading{doc.at("weights").get<std::vector<int>>()} : uniform_grading(n);
    if (g.size() != n) { throw Error(ErrorCode::InvalidDimension, "weights length does not match dim"); }
    require_positive_weights(g);
    for (const auto& entry : doc.at("brackets")) {
      const int i = entry.at("i").get<int>() - 1;
      const int j = entry.at("j").get<int>() - 1;
      if (i >= j) { throw Error(ErrorCode::InvalidDimension, "bracket entries must list i < j"); }
      for (const auto& [key, value] : entry.at("coeffs").items()) {
        alg.set(i, j, std::stoi(key) - 1, value.get<double>());
      }
    }
    return {std::move(alg), std::move(g)};
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed Lie algebra document: ") + ex.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidConfig, "malformed basis index in coeffs");
  }
}

inline std::pair<LieAlgebra, Grading> load_lie_algebra(const std::string& path)
{
  std::ifstream in(path);
  if (!in) { throw Error(ErrorCode::IoError, "cannot open " + path); }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + ex.what());
  }
  return lie_algebra_from_json(doc);
}

}  // namespace srprofile
