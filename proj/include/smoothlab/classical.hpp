#ifndef SMOOTHLAB_CLASSICAL_HPP
#define SMOOTHLAB_CLASSICAL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "smoothlab/errors.hpp"
#include "smoothlab/potential.hpp"
#include "smoothlab/rng.hpp"

namespace smoothlab {

// --- Hamiltonian flow --------------------------------------------------------
//
// Symplectic Stoermer-Verlet for H = |xi|^2/2 + V(x):
//   xi_{1/2} = xi - (h/2) grad V(x)
//   x'       = x + h xi_{1/2}
//   xi'      = xi_{1/2} - (h/2) grad V(x')
// Second order, exactly symplectic and time-reversible (h may be negative);
// relative energy drift stays O(h^2) on bounded-energy orbits of a confining
// potential.

inline void step_verlet(const PotentialModel& model, Eigen::VectorXd& x, Eigen::VectorXd& xi,
                        double h) {
  xi.noalias() -= (0.5 * h) * eval_gradient(model, x);
  x.noalias() += h * xi;
  xi.noalias() -= (0.5 * h) * eval_gradient(model, x);
}

inline PhasePoint step_verlet(const PotentialModel& model, const PhasePoint& rho, double h) {
  Eigen::VectorXd x = rho.x, xi = rho.xi;
  step_verlet(model, x, xi, h);
  return PhasePoint{std::move(x), std::move(xi)};
}

// Stored trajectory: rows of xs/xis are the samples at t_k = k * step,
// k = 0..steps (inclusive of both endpoints).
struct Trajectory {
  Eigen::MatrixXd xs;   // (steps+1) x d
  Eigen::MatrixXd xis;  // (steps+1) x d
  double step = 0.0;    // h' = T / ceil(T/h): uniform, lands exactly on T
  double energy0 = 0.0;
  double drift = 0.0;   // max_t |p(rho_t) - energy0| / (1 + energy0)

  int steps() const { return static_cast<int>(xs.rows()) - 1; }
  double horizon() const { return step * steps(); }
  PhasePoint at(int k) const {
    return PhasePoint{xs.row(k).transpose(), xis.row(k).transpose()};
  }
};

inline Trajectory integrate_flow(const PotentialModel& model, const PhasePoint& rho0, double T,
                                 double h, double drift_tol = 1e-6) {
  if (!(T > 0.0)) throw ConfigError("flow horizon T must be > 0");
  if (!(h > 0.0) || h > T) throw ConfigError("flow step h must satisfy 0 < h <= T");
  const int N = static_cast<int>(std::ceil(T / h));
  const double hh = T / N;
  const int d = static_cast<int>(rho0.x.size());

  Trajectory traj;
  traj.step = hh;
  traj.xs.resize(N + 1, d);
  traj.xis.resize(N + 1, d);

  Eigen::VectorXd x = rho0.x, xi = rho0.xi;
  traj.energy0 = 0.5 * xi.squaredNorm() + eval_potential(model, x);
  double worst = 0.0;
  int worst_k = 0;
  for (int k = 0;; ++k) {
    traj.xs.row(k) = x.transpose();
    traj.xis.row(k) = xi.transpose();
    const double e = 0.5 * xi.squaredNorm() + eval_potential(model, x);
    const double rel = std::abs(e - traj.energy0) / (1.0 + traj.energy0);
    if (rel > worst) {
      worst = rel;
      worst_k = k;
    }
    if (k == N) break;
    step_verlet(model, x, xi, hh);
  }
  traj.drift = worst;
  if (worst > drift_tol) {
    std::ostringstream os;
    os << "relative energy drift " << worst << " at t=" << worst_k * hh
       << " exceeds tolerance " << drift_tol << " (T=" << T << ", step " << hh << ")";
    throw NumericalError(os.str());
  }
  return traj;
}

// --- Trajectory functionals ----------------------------------------------------
//
// a_R(rho0) = sqrt(R^2 + p(rho0)) * int_0^T <x_t/R>^{-2 nu} dt, the weighted
// time the orbit spends near the origin; the energy factor is conserved along
// the exact flow and is evaluated at rho0.  Composite trapezoid in t, matching
// the integrator's O(h^2) order.

inline double escape_weight_integral(const Trajectory& traj, double nu, double R) {
  if (!(nu > 0.5)) throw ConfigError("escape decay exponent nu must exceed 1/2");
  if (!(R > 0.0)) throw ConfigError("escape scale R must be > 0");
  const int N = traj.steps();
  double acc = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double br2 = 1.0 + traj.xs.row(k).squaredNorm() / (R * R);
    const double w = std::pow(br2, -nu);
    acc += (k == 0 || k == N) ? 0.5 * w : w;
  }
  return std::sqrt(R * R + traj.energy0) * traj.step * acc;
}

// Time with |x_t| < r: h * #{k < N : |x_k| < r} (left-endpoint rule).
inline double occupation_time(const Trajectory& traj, double r) {
  if (r < 0.0) throw ConfigError("occupation radius must be >= 0");
  if (r == 0.0) return 0.0;
  const int N = traj.steps();
  int count = 0;
  for (int k = 0; k < N; ++k)
    if (traj.xs.row(k).norm() < r) ++count;
  return traj.step * count;
}

// --- Streaming variants ---------------------------------------------------------
//
// The sup searches evaluate millions of short orbits; these recompute the same
// functionals without storing samples, accumulating several radii in one pass.

struct EscapeIntegralResult {
  double value = 0.0;
  double energy = 0.0;
  double drift = 0.0;
};

inline std::vector<EscapeIntegralResult> escape_weight_integrals_streaming(
    const PotentialModel& model, const PhasePoint& rho0, double T, double h,
    const std::vector<double>& radii, double nu, double drift_tol = 1e-6) {
  if (radii.empty()) throw ConfigError("escape integral needs at least one radius");
  for (double R : radii)
    if (!(R > 0.0)) throw ConfigError("escape scale R must be > 0");
  if (!(nu > 0.5)) throw ConfigError("escape decay exponent nu must exceed 1/2");
  if (!(T > 0.0) || !(h > 0.0)) throw ConfigError("escape integral needs T > 0, h > 0");

  const int N = static_cast<int>(std::ceil(T / h));
  const double hh = T / N;

  Eigen::VectorXd x = rho0.x, xi = rho0.xi;
  const double e0 = 0.5 * xi.squaredNorm() + eval_potential(model, x);

  std::vector<double> acc(radii.size(), 0.0);
  const bool nu_is_one = nu == 1.0;  // hot loop: a division beats pow
  auto add = [&](double wtrap) {
    const double r2 = x.squaredNorm();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double b = 1.0 + r2 / (radii[i] * radii[i]);
      acc[i] += wtrap * (nu_is_one ? 1.0 / b : std::pow(b, -nu));
    }
  };

  double drift = 0.0;
  add(0.5);
  for (int k = 1; k <= N; ++k) {
    step_verlet(model, x, xi, hh);
    const double e = 0.5 * xi.squaredNorm() + eval_potential(model, x);
    drift = std::max(drift, std::abs(e - e0) / (1.0 + e0));
    add(k < N ? 1.0 : 0.5);
  }
  if (drift > drift_tol) {
    std::ostringstream os;
    os << "relative energy drift " << drift << " exceeds tolerance " << drift_tol
       << " during escape integral (T=" << T << ", step " << hh << ")";
    throw NumericalError(os.str());
  }

  std::vector<EscapeIntegralResult> out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i)
    out[i] = {std::sqrt(radii[i] * radii[i] + e0) * hh * acc[i], e0, drift};
  return out;
}

inline EscapeIntegralResult escape_weight_integral_streaming(const PotentialModel& model,
                                                             const PhasePoint& rho0, double T,
                                                             double h, double R, double nu,
                                                             double drift_tol = 1e-6) {
  return escape_weight_integrals_streaming(model, rho0, T, h, {R}, nu, drift_tol)[0];
}

inline double occupation_time_streaming(const PotentialModel& model, const PhasePoint& rho0,
                                        double T, double h, double r,
                                        double drift_tol = 1e-6) {
  if (r <= 0.0) return 0.0;
  const int N = static_cast<int>(std::ceil(T / h));
  const double hh = T / N;
  Eigen::VectorXd x = rho0.x, xi = rho0.xi;
  const double e0 = 0.5 * xi.squaredNorm() + eval_potential(model, x);
  double drift = 0.0;
  int count = 0;
  for (int k = 0; k < N; ++k) {
    if (x.norm() < r) ++count;
    step_verlet(model, x, xi, hh);
    drift = std::max(drift,
                     std::abs(0.5 * xi.squaredNorm() + eval_potential(model, x) - e0) /
                         (1.0 + e0));
  }
  if (drift > drift_tol)
    throw NumericalError("relative energy drift exceeded tolerance in occupation time");
  return hh * count;
}

// Jacobian of rho -> phi^T(rho) by central differences; symplecticity audit.
inline Eigen::MatrixXd flow_jacobian(const PotentialModel& model, const PhasePoint& rho0,
                                     double T, double h, double fd = 1e-6) {
  const int d = static_cast<int>(rho0.x.size());
  Eigen::MatrixXd J(2 * d, 2 * d);
  for (int j = 0; j < 2 * d; ++j) {
    PhasePoint p = rho0, m = rho0;
    if (j < d) {
      p.x[j] += fd;
      m.x[j] -= fd;
    } else {
      p.xi[j - d] += fd;
      m.xi[j - d] -= fd;
    }
    const auto fp = integrate_flow(model, p, T, h, 1.0);
    const auto fm = integrate_flow(model, m, T, h, 1.0);
    const int last = fp.steps();
    for (int i = 0; i < d; ++i) {
      J(i, j) = (fp.xs(last, i) - fm.xs(last, i)) / (2.0 * fd);
      J(d + i, j) = (fp.xis(last, i) - fm.xis(last, i)) / (2.0 * fd);
    }
  }
  return J;
}

// --- Sup constant over phase space ---------------------------------------------
//
// C0(R) = sup_rho a_R(rho), approximated by stratified sampling over energy
// shells E in linspace(0, E_max) (E = 0, the global minimum, included: the
// weight decays in |x| and the sqrt(R^2+E) gain is slower than the loss of
// time near the origin, so the origin is the exact maximizer for the shipped
// families) followed by coordinate-wise golden-section ascent from the top-k
// shell winners.

struct SearchConfig {
  double E_max = 1000.0;
  int shells = 33;
  int samples_per_shell = 64;
  int top_k = 6;
  int refine_iters = 32;
  double h = 1e-3;
  double drift_tol = 1e-6;
};

struct ClassicalConstantEstimate {
  double value = 0.0;
  PhasePoint argmax;
  double argmax_energy = 0.0;
  double R = 0.0, nu = 0.0, T = 0.0;
  int samples_used = 0;
  bool refinement_converged = true;
  bool cutoff_saturated = false;  // argmax energy within 2% of E_max
};

namespace detail {

// Scale the direction (ux, uxi) onto the energy-E shell: solve
// E = s^2 |uxi|^2/2 + V(s ux) for s >= 0 (monotone in s for confining V).
inline PhasePoint point_on_shell(const PotentialModel& model, const Eigen::VectorXd& ux,
                                 const Eigen::VectorXd& uxi, double E) {
  if (E <= 0.0)
    return PhasePoint{Eigen::VectorXd::Zero(ux.size()), Eigen::VectorXd::Zero(ux.size())};
  auto energy_at = [&](double s) {
    return 0.5 * s * s * uxi.squaredNorm() + eval_potential(model, s * ux);
  };
  double lo = 0.0, hi = 1.0;
  while (energy_at(hi) < E) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericalError("shell scaling failed to bracket the energy");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (energy_at(mid) < E ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  return PhasePoint{s * ux, s * uxi};
}

}  // namespace detail

inline ClassicalConstantEstimate classical_constant(const PotentialModel& model, double T,
                                                    double nu, double R,
                                                    const SearchConfig& cfg = SearchConfig{},
                                                    uint64_t seed = 12345) {
  if (cfg.shells < 2) throw ConfigError("stratified search needs >= 2 shells");
  if (!(cfg.E_max > 0.0)) throw ConfigError("search energy cutoff must be positive and finite");
  const int d = model.dimension;
  int evals = 0;
  auto objective = [&](const PhasePoint& rho) {
    ++evals;
    return escape_weight_integral_streaming(model, rho, T, cfg.h, R, nu, cfg.drift_tol).value;
  };

  struct Cand {
    double val;
    PhasePoint rho;
    double E;
  };
  std::vector<Cand> cands;
  Rng rng(seed);

  for (int s = 0; s < cfg.shells; ++s) {
    const double E = cfg.E_max * s / (cfg.shells - 1);
    const int nsamp = (E == 0.0) ? 1 : cfg.samples_per_shell;
    double best = -1.0;
    PhasePoint best_rho;
    for (int q = 0; q < nsamp; ++q) {
      Eigen::VectorXd ux(d), uxi(d);
      if (E == 0.0) {
        ux.setZero();
        uxi.setZero();
      } else if (d == 1) {
        const double th = 2.0 * M_PI * q / nsamp;  // sweep the (x, xi) circle
        ux[0] = std::cos(th);
        uxi[0] = std::sin(th);
      } else {
        for (int i = 0; i < d; ++i) ux[i] = rng.normal();
        for (int i = 0; i < d; ++i) uxi[i] = rng.normal();
        const double nrm = std::sqrt(ux.squaredNorm() + uxi.squaredNorm());
        if (nrm < 1e-12) {
          ux.setConstant(1.0);
          uxi.setZero();
        } else {
          ux /= nrm;
          uxi /= nrm;
        }
      }
      PhasePoint rho = detail::point_on_shell(model, ux, uxi, E);
      const double v = objective(rho);
      if (v > best) {
        best = v;
        best_rho = rho;
      }
    }
    cands.push_back({best, best_rho, E});
  }

  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.val != b.val) return a.val > b.val;
    if (a.E != b.E) return a.E < b.E;  // ties: lowest energy, then lexicographic
    for (Eigen::Index i = 0; i < a.rho.x.size(); ++i) {
      if (a.rho.x[i] != b.rho.x[i]) return a.rho.x[i] < b.rho.x[i];
      if (a.rho.xi[i] != b.rho.xi[i]) return a.rho.xi[i] < b.rho.xi[i];
    }
    return false;
  });
  const int keep = std::min<int>(cfg.top_k, static_cast<int>(cands.size()));

  const double gold = (std::sqrt(5.0) - 1.0) / 2.0;
  bool converged = true;
  auto refine_coord = [&](const PhasePoint& rho, int coord, double span) {
    auto shifted = [&](double t) {
      PhasePoint r = rho;
      if (coord < d) r.x[coord] += t;
      else r.xi[coord - d] += t;
      return r;
    };
    double a = -span, b = span;
    double c1 = b - gold * (b - a), c2 = a + gold * (b - a);
    double f1 = objective(shifted(c1)), f2 = objective(shifted(c2));
    for (int it = 0; it < 24; ++it) {
      if (f1 >= f2) {
        b = c2;
        c2 = c1;
        f2 = f1;
        c1 = b - gold * (b - a);
        f1 = objective(shifted(c1));
      } else {
        a = c1;
        c1 = c2;
        f1 = f2;
        c2 = a + gold * (b - a);
        f2 = objective(shifted(c2));
      }
    }
    const double t = f1 >= f2 ? c1 : c2;
    return std::make_pair(shifted(t), std::max(f1, f2));
  };

  Cand best = cands[0];
  for (int k = 0; k < keep; ++k) {
    PhasePoint rho = cands[k].rho;
    double val = cands[k].val;
    double span = std::max(0.5, 0.05 * std::sqrt(1.0 + cands[k].E));
    double last_gain = 0.0;
    for (int it = 0; it < cfg.refine_iters; ++it) {
      const int coord = it % (2 * d);
      auto [r2, v2] = refine_coord(rho, coord, span);
      if (v2 > val) {
        last_gain = v2 - val;
        val = v2;
        rho = r2;
      }
      if (coord == 2 * d - 1) span *= 0.6;
    }
    if (last_gain > 1e-6 * std::max(1.0, val)) converged = false;  // still climbing at budget
    if (val > best.val) {
      best.val = val;
      best.rho = rho;
      best.E = eval_symbol(model, rho);
    }
  }

  ClassicalConstantEstimate out;
  out.value = best.val;
  out.argmax = best.rho;
  out.argmax_energy = eval_symbol(model, best.rho);
  out.R = R;
  out.nu = nu;
  out.T = T;
  out.samples_used = evals;
  out.refinement_converged = converged;
  out.cutoff_saturated = out.argmax_energy >= 0.98 * cfg.E_max;
  return out;
}

// Dense-grid brute force over (x, xi) in [-box, box]^2 (d = 1 only): the
// independent oracle for the stratified search.  Streams trajectories, never
// storing them; 2000^2 orbits at h = 1e-2 keep the O(h^2) error ~1e-4.
inline double classical_constant_brute_force(const PotentialModel& model, double T, double nu,
                                             double R, double box, int points_per_axis,
                                             double h = 1e-2) {
  if (model.dimension != 1) throw ConfigError("brute-force scan is implemented for d = 1");
  const int N = static_cast<int>(std::ceil(T / h));
  const double hh = T / N;
  const bool nu_is_one = nu == 1.0;  // hot loop: a division beats pow
  const double invR2 = 1.0 / (R * R);
  auto weight = [&](double xx) {
    const double b = 1.0 + xx * xx * invR2;
    return nu_is_one ? 1.0 / b : std::pow(b, -nu);
  };
  double best = 0.0;
  for (int i = 0; i < points_per_axis; ++i) {
    const double x0 = -box + 2.0 * box * i / (points_per_axis - 1);
    for (int j = 0; j < points_per_axis; ++j) {
      const double xi0 = -box + 2.0 * box * j / (points_per_axis - 1);
      double x = x0, xi = xi0;
      const double e0 = 0.5 * xi * xi + eval_potential_1d(model, x);
      double acc = 0.5 * weight(x);
      for (int k = 1; k <= N; ++k) {
        xi -= 0.5 * hh * eval_gradient_1d(model, x);
        x += hh * xi;
        xi -= 0.5 * hh * eval_gradient_1d(model, x);
        const double w = weight(x);
        acc += (k < N) ? w : 0.5 * w;
      }
      const double val = std::sqrt(R * R + e0) * hh * acc;
      if (val > best) best = val;
    }
  }
  return best;
}

// Closed forms for the 1-d harmonic oscillator (T = 2 pi, nu = 1): along the
// energy-E orbit x_t = sqrt(2E) sin(t + phase),
//   a_R(E) = 2 pi R sqrt(R^2 + E) / sqrt(R^2 + 2E),
// maximized at E = 0 where C0(R) = 2 pi R; and the time per period spent in
// |x| < r is 4 arcsin(r / sqrt(2E)) for r below the amplitude.
inline double harmonic_escape_closed_form(double R, double E) {
  return 2.0 * M_PI * R * std::sqrt(R * R + E) / std::sqrt(R * R + 2.0 * E);
}

inline double harmonic_occupation_closed_form(double E, double r) {
  const double amp = std::sqrt(2.0 * E);
  if (r >= amp) return 2.0 * M_PI;
  return 4.0 * std::asin(r / amp);
}

}  // namespace smoothlab

#endif
