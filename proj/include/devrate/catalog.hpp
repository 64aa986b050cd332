#pragma once

#include "devrate/error.hpp"
#include "devrate/grid.hpp"
#include "devrate/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace devrate {

/// Parameters of the named built-in models; each model reads the ones it needs.
struct BuiltinParams {
  double alpha = 1.0;     // ou
  int dim = 1;            // ou, power; position dimension for langevin
  double q = 3.0;         // power
  double strength = 1.0;  // rotational
  double gamma = 1.0;     // langevin
  std::string potential = "harmonic";  // langevin: "harmonic", "double_well" or an expression in q
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"ou", "quartic", "power", "rotational", "langevin"};
  return names;
}

inline ScalarField langevin_potential(const std::string& spec, int dim) {
  if (spec == "harmonic") return harmonic_potential(dim);
  if (spec == "double_well") {
    if (dim != 1) fail(ErrorKind::parameter, "double_well potential is one-dimensional");
    return ScalarField::from_expression("q^4/4 - q^2/2", position_symbols(1), 1);
  }
  return ScalarField::from_expression(spec, position_symbols(dim), dim);
}

inline DiffusionModel builtin_model(std::string_view name, const BuiltinParams& p = {}) {
  if (name == "ou") return ornstein_uhlenbeck(p.alpha, p.dim);
  if (name == "quartic") return quartic_overdamped();
  if (name == "power") return overdamped(power_potential(p.q, p.dim), p.dim, "power(q=" + std::to_string(p.q) + ")");
  if (name == "rotational") return rotational_overdamped(p.strength);
  if (name == "langevin") return langevin(langevin_potential(p.potential, p.dim), p.gamma, p.dim);
  std::string known;
  for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
  fail(ErrorKind::config, "unknown built-in model '" + std::string(name) + "' (known: " + known + ")");
}

struct CatalogEntry {
  DiffusionModel model;
  Mesh mesh;
  std::string observable;
};

/// Every built-in configuration used by the structural checks, on a mesh sized for quick solves.
inline std::vector<CatalogEntry> builtin_catalog() {
  auto make = [](std::string_view name, BuiltinParams p) { return builtin_model(name, p); };
  BuiltinParams ou2;
  ou2.alpha = 2.0;
  ou2.dim = 2;
  BuiltinParams lv2;
  lv2.dim = 2;
  lv2.gamma = 0.5;
  BuiltinParams dw;
  dw.potential = "double_well";
  dw.gamma = 2.0;
  return {
      {make("ou", {}), Mesh::uniform(1, -8, 8, 401), "x"},
      {make("ou", ou2), Mesh::uniform(2, -6, 6, 61), "x0 + x1"},
      {make("quartic", {}), Mesh::uniform(1, -4, 4, 201), "x^2"},
      {make("power", {}), Mesh::uniform(1, -8, 8, 201), "sin(x)"},
      {make("rotational", {}), Mesh::uniform(2, -6, 6, 61), "x0"},
      {make("langevin", {}), Mesh::uniform(2, -6, 6, 61), "q"},
      {make("langevin", lv2), Mesh::uniform(4, -5, 5, 8), "q0"},
      {make("langevin", dw), Mesh::uniform(2, -4, 4, 61), "q"},
  };
}

}  // namespace devrate
