#ifndef SMOOTHLAB_CONFIG_HPP
#define SMOOTHLAB_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlab/classical.hpp"
#include "smoothlab/errors.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/potential.hpp"

namespace smoothlab {

// Declarative run description, read from a single JSON file.  Every field has
// a default; the parsed struct is fully resolved (the report echoes it back so
// a run is reproducible from its own artifacts).
struct RunConfig {
  PotentialModel model = make_model(PotentialKind::harmonic, 1.0, {}, 1);

  int grid_n = 512;
  double grid_L = 24.0;

  double horizon = 2.0 * M_PI;
  double nu = 1.0;
  std::vector<double> R_list{1.0, 2.0, 4.0, 8.0};

  SearchConfig search;  // E_max overridden to 200 below (desk-scale default)

  int quadrature_nodes = 64;
  std::vector<PhasePoint> probes;

  std::vector<double> escape_energies{10.0, 100.0, 1000.0, 10000.0};
  double escape_radius = 1.0;
  int escape_phase_samples = 64;

  double assumption_box = 50.0;
  int assumption_points = 101;
  int assumption_max_order = 2;

  double flow_h = 1e-3;
  double drift_tol = 1e-6;
  uint64_t seed = 12345;
};

inline RunConfig default_config() {
  RunConfig cfg;
  cfg.search.E_max = 200.0;
  cfg.probes.push_back(phase_point_1d(0.6, 0.0));
  return cfg;
}

namespace detail {

inline PotentialKind parse_kind(const std::string& s) {
  if (s == "harmonic") return PotentialKind::harmonic;
  if (s == "bracket_power") return PotentialKind::bracket_power;
  if (s == "anharmonic_perturbation") return PotentialKind::anharmonic_perturbation;
  throw ConfigError("unknown potential kind: " + s);
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline void validate_config(const RunConfig& cfg) {
  if (!(cfg.nu > 0.5)) throw ConfigError("nu must exceed 1/2");
  if (cfg.R_list.empty()) throw ConfigError("R_list must be non-empty");
  for (std::size_t i = 0; i < cfg.R_list.size(); ++i) {
    if (!(cfg.R_list[i] >= 1.0)) throw ConfigError("every R must be >= 1");
    if (i > 0 && !(cfg.R_list[i] > cfg.R_list[i - 1]))
      throw ConfigError("R_list must be strictly ascending");
  }
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(cfg.grid_L > 0.0)) throw ConfigError("grid half-width must be > 0");
  if (!is_power_of_two(cfg.grid_n)) throw ConfigError("grid n must be a power of two >= 2");
  if (cfg.quadrature_nodes < 16) throw ConfigError("quadrature_nodes must be >= 16");
  if (!(cfg.escape_radius >= 0.0)) throw ConfigError("escape radius must be >= 0");
  if (cfg.escape_phase_samples < 1) throw ConfigError("escape phase_samples must be >= 1");
  if (cfg.assumption_max_order > 4) throw ConfigError("assumption max_order is capped at 4");
  if (!(cfg.flow_h > 0.0)) throw ConfigError("flow step h must be > 0");
  for (const auto& p : cfg.probes)
    if (p.x.size() != cfg.model.dimension)
      throw ConfigError("probe center dimension does not match the potential");
  // m in (0,1] enforced by make_model; re-check in case the struct was edited.
  if (!(cfg.model.m > 0.0) || cfg.model.m > 1.0)
    throw ConfigError("potential exponent m must lie in (0,1]");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg = default_config();
  if (j.contains("potential")) {
    const auto& jp = j.at("potential");
    const PotentialKind kind =
        detail::parse_kind(detail::field_or<std::string>(jp, "kind", "harmonic"));
    const double m = detail::field_or<double>(jp, "m", 1.0);
    const auto coeff = detail::field_or<std::vector<double>>(jp, "coefficients", {});
    const int dim = detail::field_or<int>(jp, "dimension", 1);
    cfg.model = make_model(kind, m, coeff, dim);
  }
  if (j.contains("grid")) {
    const auto& jg = j.at("grid");
    cfg.grid_n = detail::field_or<int>(jg, "n", cfg.grid_n);
    cfg.grid_L = detail::field_or<double>(jg, "L", cfg.grid_L);
  }
  cfg.horizon = detail::field_or<double>(j, "horizon", cfg.horizon);
  cfg.nu = detail::field_or<double>(j, "nu", cfg.nu);
  cfg.R_list = detail::field_or<std::vector<double>>(j, "R_list", cfg.R_list);
  if (j.contains("search")) {
    const auto& js = j.at("search");
    cfg.search.E_max = detail::field_or<double>(js, "E_max", cfg.search.E_max);
    cfg.search.shells = detail::field_or<int>(js, "shells", cfg.search.shells);
    cfg.search.samples_per_shell =
        detail::field_or<int>(js, "samples_per_shell", cfg.search.samples_per_shell);
    cfg.search.top_k = detail::field_or<int>(js, "top_k", cfg.search.top_k);
    cfg.search.refine_iters = detail::field_or<int>(js, "refine_iters", cfg.search.refine_iters);
    cfg.search.h = detail::field_or<double>(js, "h", cfg.search.h);
    cfg.search.drift_tol = detail::field_or<double>(js, "drift_tol", cfg.search.drift_tol);
  }
  cfg.quadrature_nodes = detail::field_or<int>(j, "quadrature_nodes", cfg.quadrature_nodes);
  if (j.contains("probes")) {
    cfg.probes.clear();
    for (const auto& row : j.at("probes")) {
      std::vector<double> flat;
      try {
        flat = row.get<std::vector<double>>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad probe row: ") + e.what());
      }
      if (flat.size() % 2 != 0) throw ConfigError("probe rows must hold [x..., xi...] pairs");
      const int d = static_cast<int>(flat.size()) / 2;
      Eigen::VectorXd x(d), xi(d);
      for (int i = 0; i < d; ++i) {
        x[i] = flat[i];
        xi[i] = flat[d + i];
      }
      cfg.probes.push_back(make_phase_point(std::move(x), std::move(xi)));
    }
  }
  if (j.contains("escape")) {
    const auto& je = j.at("escape");
    cfg.escape_energies =
        detail::field_or<std::vector<double>>(je, "energies", cfg.escape_energies);
    cfg.escape_radius = detail::field_or<double>(je, "radius", cfg.escape_radius);
    cfg.escape_phase_samples =
        detail::field_or<int>(je, "phase_samples", cfg.escape_phase_samples);
  }
  if (j.contains("assumption")) {
    const auto& ja = j.at("assumption");
    cfg.assumption_box = detail::field_or<double>(ja, "box", cfg.assumption_box);
    cfg.assumption_points = detail::field_or<int>(ja, "points_per_axis", cfg.assumption_points);
    cfg.assumption_max_order = detail::field_or<int>(ja, "max_order", cfg.assumption_max_order);
  }
  cfg.flow_h = detail::field_or<double>(j, "flow_h", cfg.flow_h);
  cfg.drift_tol = detail::field_or<double>(j, "drift_tol", cfg.drift_tol);
  cfg.seed = detail::field_or<uint64_t>(j, "seed", cfg.seed);
  validate_config(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

// Fully resolved echo of the configuration for the run report.
inline nlohmann::json echo_config(const RunConfig& cfg) {
  nlohmann::json j;
  j["potential"] = {{"kind", to_string(cfg.model.kind)},
                    {"m", cfg.model.m},
                    {"coefficients", cfg.model.coefficients},
                    {"dimension", cfg.model.dimension}};
  j["grid"] = {{"n", cfg.grid_n}, {"L", cfg.grid_L}};
  j["horizon"] = cfg.horizon;
  j["nu"] = cfg.nu;
  j["R_list"] = cfg.R_list;
  j["search"] = {{"E_max", cfg.search.E_max},
                 {"shells", cfg.search.shells},
                 {"samples_per_shell", cfg.search.samples_per_shell},
                 {"top_k", cfg.search.top_k},
                 {"refine_iters", cfg.search.refine_iters},
                 {"h", cfg.search.h},
                 {"drift_tol", cfg.search.drift_tol}};
  j["quadrature_nodes"] = cfg.quadrature_nodes;
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : cfg.probes) {
    std::vector<double> flat;
    for (Eigen::Index i = 0; i < p.x.size(); ++i) flat.push_back(p.x[i]);
    for (Eigen::Index i = 0; i < p.xi.size(); ++i) flat.push_back(p.xi[i]);
    probes.push_back(flat);
  }
  j["probes"] = probes;
  j["escape"] = {{"energies", cfg.escape_energies},
                 {"radius", cfg.escape_radius},
                 {"phase_samples", cfg.escape_phase_samples}};
  j["assumption"] = {{"box", cfg.assumption_box},
                     {"points_per_axis", cfg.assumption_points},
                     {"max_order", cfg.assumption_max_order}};
  j["flow_h"] = cfg.flow_h;
  j["drift_tol"] = cfg.drift_tol;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace smoothlab

#endif
