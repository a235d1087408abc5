#ifndef SMOOTHLAB_RUN_HPP
#define SMOOTHLAB_RUN_HPP

#include <fcntl.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlab/classical.hpp"
#include "smoothlab/config.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/potential.hpp"
#include "smoothlab/quantum.hpp"
#include "smoothlab/report.hpp"
#include "smoothlab/wavepacket.hpp"

namespace smoothlab {

inline const char* library_version() { return "1.0.0"; }

// Exclusive ownership of an output directory for the lifetime of a run.
class OutdirLock {
 public:
  explicit OutdirLock(const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    path_ = (std::filesystem::path(outdir) / ".lock").string();
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw RunError("output directory is locked by another process (remove " + path_ +
                     " if stale)");
  }
  OutdirLock(const OutdirLock&) = delete;
  OutdirLock& operator=(const OutdirLock&) = delete;
  ~OutdirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }

 private:
  std::string path_;
  int fd_ = -1;
};

// --- Correspondence sweep -----------------------------------------------------------

struct ConstantsRow {
  double R = 0.0;
  double C0 = 0.0;
  double Q0 = 0.0;
  double ratio = 0.0;
  bool band_ok = false;
  double deviation = 0.0;        // |ratio - 1|
  double top_decade_mass = 0.0;  // maximizer mass in [0.8 E_band, E_band]
  int kband = 0;
  double E_band = 0.0;
  PhasePoint argmax;             // classical maximizer
  double argmax_energy = 0.0;
  bool cutoff_saturated = false;
  bool fallback_used = false;
  int iterations = 0;
};

struct CorrespondenceReport {
  std::vector<ConstantsRow> rows;
  double fitted_c = 0.0;
  bool inequalities_pass = false;
  bool any_excluded = false;
  bool ill_conditioned = false;
  std::vector<std::string> warnings;
};

// Smallest non-negative c with C0/(1+c/R) <= Q0 <= C0 (1+c/R) on every row:
// c = max over rows of R * max(C0/Q0 - 1, Q0/C0 - 1).
inline double fit_scale_constant(const std::vector<ConstantsRow>& rows) {
  double c = 0.0;
  for (const auto& r : rows) {
    if (!r.band_ok || !(r.C0 > 0.0) || !(r.Q0 > 0.0)) continue;
    c = std::max(c, r.R * std::max(r.C0 / r.Q0 - 1.0, r.Q0 / r.C0 - 1.0));
  }
  return c;
}

inline CorrespondenceReport run_correspondence(const RunConfig& cfg) {
  validate_config(cfg);
  const GridSpec g = build_grid(cfg.model.dimension, cfg.grid_n, cfg.grid_L);
  const OperatorMatrix P = build_hamiltonian(cfg.model, g);
  const SpectralData sd = eigendecompose(P);

  CorrespondenceReport rep;
  for (double R : cfg.R_list) {
    ConstantsRow row;
    row.R = R;

    const ClassicalConstantEstimate cls =
        classical_constant(cfg.model, cfg.horizon, cfg.nu, R, cfg.search, cfg.seed);
    row.C0 = cls.value;
    row.argmax = cls.argmax;
    row.argmax_energy = cls.argmax_energy;
    row.cutoff_saturated = cls.cutoff_saturated;
    if (cls.cutoff_saturated)
      rep.warnings.push_back("classical argmax at the search cutoff for R=" + format_short(R) +
                             "; raise E_max");

    const BandedGram bg = banded_gram(cfg.model, g, sd, cfg.horizon, cfg.nu, R,
                                      cfg.quadrature_nodes);
    const QuantumConstantEstimate est = quantum_constant(bg, EigMethod::power_iteration);
    row.Q0 = est.value;
    row.kband = bg.kband;
    row.E_band = bg.E_band;
    row.fallback_used = est.fallback_used;
    row.iterations = est.iterations;
    row.top_decade_mass = top_decade_mass(sd, bg, est.maximizer);
    row.band_ok = row.top_decade_mass <= 1e-6;
    if (!row.band_ok) {
      rep.any_excluded = true;
      rep.warnings.push_back("row R=" + format_short(R) +
                             " excluded: maximizer presses the band cutoff (mass " +
                             format_short(row.top_decade_mass) + ")");
    }

    // Vanishing horizon drives both constants toward 0 and leaves the ratio
    // dominated by the absolute quadrature error: flag it.
    if (row.C0 < 1e-4) {
      rep.ill_conditioned = true;
      rep.warnings.push_back("ratio ill-conditioned at R=" + format_short(R) +
                             ": classical constant " + format_sci(row.C0) + " is near zero");
    }
    row.ratio = row.C0 > 0.0 ? row.Q0 / row.C0 : 0.0;
    row.deviation = std::abs(row.ratio - 1.0);
    rep.rows.push_back(std::move(row));
  }

  rep.fitted_c = fit_scale_constant(rep.rows);
  rep.inequalities_pass = !rep.ill_conditioned;
  for (const auto& r : rep.rows) {
    if (!r.band_ok || rep.ill_conditioned) continue;
    const double up = r.C0 * (1.0 + rep.fitted_c / r.R);
    const double lo = r.C0 / (1.0 + rep.fitted_c / r.R);
    if (!(lo <= r.Q0 * (1.0 + 1e-12) && r.Q0 <= up * (1.0 + 1e-12)))
      rep.inequalities_pass = false;
  }
  return rep;
}

// --- Escape scaling -----------------------------------------------------------------

struct EscapeRow {
  double E = 0.0;
  double time = 0.0;    // max occupation time over shell phases
  double scaled = 0.0;  // time * sqrt(E) / r
};

struct EscapeReport {
  std::vector<EscapeRow> rows;
  double slope = 0.0;      // least-squares slope of log(time) vs log(E)
  double Cprime = 0.0;     // max of scaled column
  double Cprime_min = 0.0;
  bool fit_done = false;
  std::string notice;
};

inline EscapeReport run_escape_scaling(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.escape_energies.size() < 2)
    throw ConfigError("escape study needs at least two energies");
  const auto [emin, emax] = std::minmax_element(cfg.escape_energies.begin(),
                                                cfg.escape_energies.end());
  if (!(*emax >= 100.0 * *emin))
    throw ConfigError("escape energy list must span at least two decades");

  EscapeReport rep;
  const int d = cfg.model.dimension;
  Rng rng(cfg.seed);
  for (double E : cfg.escape_energies) {
    double best = 0.0;
    for (int q = 0; q < cfg.escape_phase_samples; ++q) {
      Eigen::VectorXd ux(d), uxi(d);
      if (d == 1) {
        const double th = 2.0 * M_PI * q / cfg.escape_phase_samples;
        ux[0] = std::cos(th);
        uxi[0] = std::sin(th);
      } else {
        for (int i = 0; i < d; ++i) ux[i] = rng.normal();
        for (int i = 0; i < d; ++i) uxi[i] = rng.normal();
        const double nrm = std::sqrt(ux.squaredNorm() + uxi.squaredNorm());
        ux /= nrm;
        uxi /= nrm;
      }
      const PhasePoint rho = detail::point_on_shell(cfg.model, ux, uxi, E);
      best = std::max(best, occupation_time_streaming(cfg.model, rho, cfg.horizon, cfg.flow_h,
                                                      cfg.escape_radius, cfg.drift_tol));
    }
    EscapeRow row;
    row.E = E;
    row.time = best;
    row.scaled = cfg.escape_radius > 0.0 ? best * std::sqrt(E) / cfg.escape_radius : 0.0;
    rep.rows.push_back(row);
  }

  bool positive = cfg.escape_radius > 0.0;
  for (const auto& r : rep.rows) positive = positive && r.time > 0.0;
  if (!positive) {
    rep.notice = "fit skipped: zero radius or zero occupation time";
    return rep;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(rep.rows.size());
  for (const auto& r : rep.rows) {
    const double x = std::log(r.E), y = std::log(r.time);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.Cprime = rep.rows.front().scaled;
  rep.Cprime_min = rep.rows.front().scaled;
  for (const auto& r : rep.rows) {
    rep.Cprime = std::max(rep.Cprime, r.scaled);
    rep.Cprime_min = std::min(rep.Cprime_min, r.scaled);
  }
  rep.fit_done = true;
  return rep;
}

// --- Probe batch ---------------------------------------------------------------------

struct ProbeRunReport {
  std::vector<ProbeReport> rows;        // centers x R_list
  bool all_sup_certified = true;
  bool any_rejected = false;
};

inline ProbeRunReport run_probes(const RunConfig& cfg) {
  validate_config(cfg);
  ProbeRunReport rep;
  if (cfg.probes.empty()) return rep;

  const GridSpec g = build_grid(cfg.model.dimension, cfg.grid_n, cfg.grid_L);
  const OperatorMatrix P = build_hamiltonian(cfg.model, g);
  const SpectralData sd = eigendecompose(P);

  std::vector<BandedGram> grams;
  for (double R : cfg.R_list)
    grams.push_back(banded_gram(cfg.model, g, sd, cfg.horizon, cfg.nu, R,
                                cfg.quadrature_nodes));

  for (const auto& center : cfg.probes) {
    auto rows = probe_lower_bounds(cfg.model, g, sd, grams, center, cfg.flow_h);
    for (auto& r : rows) {
      if (!r.accepted) rep.any_rejected = true;
      else if (!r.sup_certified) rep.all_sup_certified = false;
      rep.rows.push_back(std::move(r));
    }
  }
  return rep;
}

// --- Admissibility -------------------------------------------------------------------

inline AssumptionReport run_check_assumption(const RunConfig& cfg) {
  validate_config(cfg);
  return check_assumption(cfg.model, cfg.assumption_box, cfg.assumption_points,
                          cfg.assumption_max_order);
}

// --- Emission ---------------------------------------------------------------------------

inline nlohmann::json versions_json() {
  nlohmann::json v;
  v["library"] = library_version();
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return v;
}

inline nlohmann::json correspondence_json(const CorrespondenceReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    std::vector<double> argmax;
    for (Eigen::Index i = 0; i < r.argmax.x.size(); ++i) argmax.push_back(r.argmax.x[i]);
    for (Eigen::Index i = 0; i < r.argmax.xi.size(); ++i) argmax.push_back(r.argmax.xi[i]);
    rows.push_back({{"R", r.R},
                    {"C0", r.C0},
                    {"Q0", r.Q0},
                    {"ratio", r.ratio},
                    {"band_ok", r.band_ok},
                    {"deviation", r.deviation},
                    {"top_decade_mass", r.top_decade_mass},
                    {"kband", r.kband},
                    {"E_band", r.E_band},
                    {"argmax", argmax},
                    {"argmax_energy", r.argmax_energy},
                    {"cutoff_saturated", r.cutoff_saturated},
                    {"power_iterations", r.iterations},
                    {"dense_fallback", r.fallback_used}});
  }
  return {{"rows", rows},
          {"fitted_c", rep.fitted_c},
          {"inequalities_pass", rep.inequalities_pass},
          {"any_excluded", rep.any_excluded},
          {"ill_conditioned", rep.ill_conditioned},
          {"warnings", rep.warnings}};
}

inline void emit_correspondence(const std::string& outdir, const RunConfig& cfg,
                                const CorrespondenceReport& rep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({format_sci(r.R), format_sci(r.C0), format_sci(r.Q0), format_sci(r.ratio),
                    r.band_ok ? "true" : "false"});
  const auto dir = std::filesystem::path(outdir);
  std::filesystem::create_directories(dir);
  write_csv((dir / "constants.csv").string(), "R,C0,Q0,ratio,band_ok", rows);

  nlohmann::json j;
  j["kind"] = "correspondence";
  j["config"] = echo_config(cfg);
  j["result"] = correspondence_json(rep);
  j["versions"] = versions_json();
  j["seed"] = cfg.seed;
  write_json_file((dir / "report.json").string(), j);

  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rep.rows)
    if (r.band_ok && r.ratio > 0.0) pts.push_back({r.R, r.ratio});
  write_loglog_svg((dir / "ratio_vs_R.svg").string(), "constant ratio vs scale", "R",
                   "Q0/C0", pts);
}

inline void emit_escape(const std::string& outdir, const RunConfig& cfg,
                        const EscapeReport& rep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({format_sci(r.E), format_sci(r.time), format_sci(r.scaled)});
  const auto dir = std::filesystem::path(outdir);
  std::filesystem::create_directories(dir);
  write_csv((dir / "escape.csv").string(), "E,time,scaled", rows);

  nlohmann::json jr;
  jr["slope"] = rep.slope;
  jr["Cprime"] = rep.Cprime;
  jr["Cprime_min"] = rep.Cprime_min;
  jr["fit_done"] = rep.fit_done;
  jr["notice"] = rep.notice;
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    jrows.push_back({{"E", r.E}, {"time", r.time}, {"scaled", r.scaled}});
  jr["rows"] = jrows;

  nlohmann::json j;
  j["kind"] = "escape";
  j["config"] = echo_config(cfg);
  j["result"] = jr;
  j["versions"] = versions_json();
  j["seed"] = cfg.seed;
  write_json_file((dir / "report.json").string(), j);

  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rep.rows) pts.push_back({r.E, r.time});
  write_loglog_svg((dir / "occupation_vs_E.svg").string(), "occupation time vs energy", "E",
                   "time", pts);
}

inline void emit_probes(const std::string& outdir, const RunConfig& cfg,
                        const ProbeRunReport& rep) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows) {
    std::string cx = format_sci(r.center.x.size() ? r.center.x[0] : 0.0);
    std::string ck = format_sci(r.center.xi.size() ? r.center.xi[0] : 0.0);
    rows.push_back({cx, ck, format_sci(r.R), r.accepted ? "true" : "false", format_sci(r.S),
                    format_sci(r.A), format_sci(r.Abar), format_sci(r.ratio_S_A),
                    format_sci(r.ratio_Abar_A), format_sci(r.Q0),
                    r.sup_certified ? "true" : "false"});
  }
  const auto dir = std::filesystem::path(outdir);
  std::filesystem::create_directories(dir);
  write_csv((dir / "probes.csv").string(),
            "x,xi,R,accepted,S,A,Abar,S_over_A,Abar_over_A,Q0,sup_certified", rows);

  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    std::vector<double> cx, ck;
    for (Eigen::Index i = 0; i < r.center.x.size(); ++i) cx.push_back(r.center.x[i]);
    for (Eigen::Index i = 0; i < r.center.xi.size(); ++i) ck.push_back(r.center.xi[i]);
    jrows.push_back({{"center_x", cx},
                     {"center_xi", ck},
                     {"R", r.R},
                     {"accepted", r.accepted},
                     {"reason", r.reason},
                     {"S", r.S},
                     {"A", r.A},
                     {"Abar", r.Abar},
                     {"S_over_A", r.ratio_S_A},
                     {"Abar_over_A", r.ratio_Abar_A},
                     {"Q0", r.Q0},
                     {"sup_certified", r.sup_certified},
                     {"above_band_mass", r.above_band}});
  }
  nlohmann::json j;
  j["kind"] = "probe";
  j["config"] = echo_config(cfg);
  j["result"] = {{"rows", jrows},
                 {"all_sup_certified", rep.all_sup_certified},
                 {"any_rejected", rep.any_rejected}};
  j["versions"] = versions_json();
  j["seed"] = cfg.seed;
  write_json_file((dir / "report.json").string(), j);
}

inline void emit_assumption(const std::string& outdir, const RunConfig& cfg,
                            const AssumptionReport& rep) {
  nlohmann::json jorders = nlohmann::json::array();
  for (const auto& o : rep.orders)
    jorders.push_back({{"order", o.order},
                       {"sup_ratio", o.sup_ratio},
                       {"growth", o.growth},
                       {"diverging", o.diverging}});
  nlohmann::json j;
  j["kind"] = "check-assumption";
  j["config"] = echo_config(cfg);
  j["result"] = {{"box", rep.box},
                 {"max_order", rep.max_order},
                 {"squeeze_upper", rep.squeeze_upper},
                 {"squeeze_lower", rep.squeeze_lower},
                 {"orders", jorders},
                 {"pass", rep.pass}};
  j["versions"] = versions_json();
  j["seed"] = cfg.seed;
  std::filesystem::create_directories(std::filesystem::path(outdir));
  write_json_file((std::filesystem::path(outdir) / "report.json").string(), j);
}

}  // namespace smoothlab

#endif
