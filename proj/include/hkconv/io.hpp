#pragma once

#include <cstddef>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hkconv/measure.hpp"
#include "hkconv/metric_space.hpp"

namespace hkconv {

/// Malformed or inconsistent input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// Accepts a path or, when the argument starts with '{' or '[', inline JSON.
inline json read_json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      return json::parse(arg);
    } catch (const json::exception& e) {
      throw InputError(std::string("inline JSON: ") + e.what());
    }
  }
  return read_json_file(arg);
}

// Space files:
//   {"backend": "euclidean", "coords": [[x, ...], ...]}
//   {"backend": "graph", "n": N, "edges": [[i, j, w], ...]}   (backend optional)
//   {"backend": "matrix", "dist": [[...], ...]}
inline FiniteMetricSpace space_from_json(const json& j) {
  try {
    if (!j.is_object()) throw InputError("space: expected a JSON object");
    std::string backend = j.value("backend", std::string());
    if (backend.empty()) backend = j.contains("edges") ? "graph" : j.contains("coords") ? "euclidean" : "matrix";
    if (backend == "euclidean") return FiniteMetricSpace::euclidean(j.at("coords").get<std::vector<std::vector<double>>>());
    if (backend == "graph") {
      std::vector<Edge> edges;
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw InputError("space: edges must be [i, j, w] triples");
        edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
      }
      return FiniteMetricSpace::graph(j.at("n").get<std::size_t>(), edges);
    }
    if (backend == "matrix") return FiniteMetricSpace::from_matrix(j.at("dist").get<std::vector<std::vector<double>>>());
    throw InputError("space: unknown backend '" + backend + "'");
  } catch (const json::exception& e) {
    throw InputError(std::string("space: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

inline json space_to_json(const FiniteMetricSpace& X) {
  json j;
  j["backend"] = to_string(X.backend());
  switch (X.backend()) {
    case Backend::euclidean: {
      json coords = json::array();
      for (std::size_t i = 0; i < X.base_size(); ++i) {
        const auto c = X.coords(i);
        coords.push_back(std::vector<double>(c.begin(), c.end()));
      }
      j["coords"] = coords;
      break;
    }
    case Backend::graph: {
      j["n"] = X.base_size();
      json edges = json::array();
      for (const auto& e : X.edges()) edges.push_back(json::array({e.from, e.to, e.weight}));
      j["edges"] = edges;
      break;
    }
    case Backend::matrix: j["dist"] = X.distance_matrix(); break;
  }
  return j;
}

// Measure files: {"space": "<label>", "atoms": [[i, m], ...]}. The space
// label is informational; the caller supplies the space itself.
inline DiscreteMeasure measure_from_json(const json& j, SpacePtr space) {
  try {
    if (!j.is_object()) throw InputError("measure: expected a JSON object");
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw InputError("measure: atoms must be [index, mass] pairs");
      atoms.push_back({a[0].get<std::size_t>(), a[1].get<double>()});
    }
    return DiscreteMeasure(std::move(space), std::move(atoms));
  } catch (const json::exception& e) {
    throw InputError(std::string("measure: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  } catch (const std::out_of_range& e) {
    throw InputError(e.what());
  }
}

/// Doubles are written with round-trip precision, so parsing the result
/// reproduces the measure exactly.
inline json measure_to_json(const DiscreteMeasure& mu, const std::string& space_label) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back(json::array({a.index, a.mass}));
  return {{"space", space_label}, {"atoms", atoms}};
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw InputError(std::string(what) + ": empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) throw InputError(std::string(what) + ": ragged matrix");
      for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace hkconv
