#ifndef SMOOTHLAB_POTENTIAL_HPP
#define SMOOTHLAB_POTENTIAL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "smoothlab/errors.hpp"

namespace smoothlab {

enum class PotentialKind { harmonic, bracket_power, anharmonic_perturbation };

inline std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::bracket_power: return "bracket_power";
    case PotentialKind::anharmonic_perturbation: return "anharmonic_perturbation";
  }
  return "?";
}

// A confining potential 0 <= V(x) ~ <x>^{2m}, together with the declared
// growth exponent m used by the admissibility check.
//
// Shipped families (V(0) = 0 for all of them):
//   harmonic                  V = |x|^2 / 2, m = 1
//   bracket_power             V = <x>^{2e} - 1 with <x> = sqrt(1+|x|^2);
//                             e defaults to m, and coefficients[0] (if present
//                             and > 0) overrides the actual exponent — that is
//                             how a deliberately inadmissible model (declared
//                             m smaller than the true growth) is constructed.
//   anharmonic_perturbation   V = |x|^2/2 + eps * sum_i (1 - cos(w x_i)),
//                             eps = coefficients[0] (default 0.5, must be >= 0),
//                             w = coefficients[1] (default 1); m = 1.
struct PotentialModel {
  PotentialKind kind = PotentialKind::harmonic;
  double m = 1.0;
  std::vector<double> coefficients;
  int dimension = 1;
};

inline PotentialModel make_model(PotentialKind kind, double m,
                                 std::vector<double> coefficients, int dimension) {
  if (!(m > 0.0) || m > 1.0) throw ConfigError("potential exponent m must lie in (0,1]");
  if (dimension < 1) throw ConfigError("potential dimension must be >= 1");
  if (kind == PotentialKind::harmonic && m != 1.0)
    throw ConfigError("harmonic potential has m = 1");
  if (kind == PotentialKind::anharmonic_perturbation && !coefficients.empty() &&
      coefficients[0] < 0.0)
    throw ConfigError("anharmonic perturbation size must be >= 0");
  return PotentialModel{kind, m, std::move(coefficients), dimension};
}

struct PhasePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;
};

inline PhasePoint make_phase_point(Eigen::VectorXd x, Eigen::VectorXd xi) {
  if (x.size() != xi.size()) throw ConfigError("phase point needs matching x/xi sizes");
  if (!x.allFinite() || !xi.allFinite()) throw ConfigError("phase point must be finite");
  return PhasePoint{std::move(x), std::move(xi)};
}

inline PhasePoint phase_point_1d(double x, double xi) {
  Eigen::VectorXd vx(1), vxi(1);
  vx << x;
  vxi << xi;
  return PhasePoint{vx, vxi};
}

namespace detail {
inline double bracket_exponent(const PotentialModel& model) {
  if (model.kind == PotentialKind::bracket_power && !model.coefficients.empty() &&
      model.coefficients[0] > 0.0)
    return model.coefficients[0];
  return model.m;
}
inline double anharmonic_eps(const PotentialModel& model) {
  return model.coefficients.empty() ? 0.5 : model.coefficients[0];
}
inline double anharmonic_freq(const PotentialModel& model) {
  return model.coefficients.size() < 2 ? 1.0 : model.coefficients[1];
}
}  // namespace detail

inline double eval_potential(const PotentialModel& model, const Eigen::VectorXd& x) {
  const double r2 = x.squaredNorm();
  switch (model.kind) {
    case PotentialKind::harmonic:
      return 0.5 * r2;
    case PotentialKind::bracket_power:
      return std::pow(1.0 + r2, detail::bracket_exponent(model)) - 1.0;
    case PotentialKind::anharmonic_perturbation: {
      const double eps = detail::anharmonic_eps(model);
      const double w = detail::anharmonic_freq(model);
      double pert = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) pert += 1.0 - std::cos(w * x[i]);
      return 0.5 * r2 + eps * pert;
    }
  }
  throw ConfigError("unknown potential kind");
}

inline Eigen::VectorXd eval_gradient(const PotentialModel& model, const Eigen::VectorXd& x) {
  switch (model.kind) {
    case PotentialKind::harmonic:
      return x;
    case PotentialKind::bracket_power: {
      const double e = detail::bracket_exponent(model);
      const double f = 2.0 * e * std::pow(1.0 + x.squaredNorm(), e - 1.0);
      return f * x;
    }
    case PotentialKind::anharmonic_perturbation: {
      const double eps = detail::anharmonic_eps(model);
      const double w = detail::anharmonic_freq(model);
      Eigen::VectorXd g = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += eps * w * std::sin(w * x[i]);
      return g;
    }
  }
  throw ConfigError("unknown potential kind");
}

// Scalar conveniences for d = 1 hot loops.
inline double eval_potential_1d(const PotentialModel& model, double x) {
  switch (model.kind) {
    case PotentialKind::harmonic:
      return 0.5 * x * x;
    case PotentialKind::bracket_power:
      return std::pow(1.0 + x * x, detail::bracket_exponent(model)) - 1.0;
    case PotentialKind::anharmonic_perturbation: {
      const double eps = detail::anharmonic_eps(model);
      const double w = detail::anharmonic_freq(model);
      return 0.5 * x * x + eps * (1.0 - std::cos(w * x));
    }
  }
  throw ConfigError("unknown potential kind");
}

inline double eval_gradient_1d(const PotentialModel& model, double x) {
  switch (model.kind) {
    case PotentialKind::harmonic:
      return x;
    case PotentialKind::bracket_power: {
      const double e = detail::bracket_exponent(model);
      return 2.0 * e * std::pow(1.0 + x * x, e - 1.0) * x;
    }
    case PotentialKind::anharmonic_perturbation: {
      const double eps = detail::anharmonic_eps(model);
      const double w = detail::anharmonic_freq(model);
      return x + eps * w * std::sin(w * x);
    }
  }
  throw ConfigError("unknown potential kind");
}

// Hamiltonian symbol p(x, xi) = |xi|^2/2 + V(x).
inline double eval_symbol(const PotentialModel& model, const PhasePoint& rho) {
  return 0.5 * rho.xi.squaredNorm() + eval_potential(model, rho.x);
}

// --- Admissibility check -----------------------------------------------------
//
// Empirically tests the two-sided growth bound and the derivative bounds
//   |d^a V(x)| <= C_a <x>^{2m-|a|},   (1/C) <x>^{2m} - C <= V(x) <= C <x>^{2m}
// on a sample box, by comparing the sup of the normalized ratio on nested
// sub-boxes: for an admissible (V, m) the ratios saturate as the box grows,
// for a declared m that undershoots the true growth they keep climbing.

struct AssumptionOrderReport {
  int order = 0;                     // |alpha|
  double sup_ratio = 0.0;            // sup |d^a V| / <x>^{2m-|a|} on the full box
  double growth = 0.0;               // sup(full box) / sup(half box)
  bool diverging = false;
};

struct AssumptionReport {
  double box = 0.0;
  int max_order = 0;
  double squeeze_upper = 0.0;        // smallest C with V <= C <x>^{2m}
  double squeeze_lower = 0.0;        // smallest C with (1/C)<x>^{2m} - C <= V
  std::vector<AssumptionOrderReport> orders;
  bool pass = false;
};

namespace detail {

// |d^a V| estimated by nested central differences, one axis at a time.
inline double partial_derivative(const PotentialModel& model, Eigen::VectorXd x,
                                 const std::vector<int>& alpha, double h) {
  int axis = -1;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0) { axis = static_cast<int>(i); break; }
  if (axis < 0) return eval_potential(model, x);
  std::vector<int> rest = alpha;
  rest[axis] -= 1;
  Eigen::VectorXd xp = x, xm = x;
  xp[axis] += h;
  xm[axis] -= h;
  return (partial_derivative(model, xp, rest, h) - partial_derivative(model, xm, rest, h)) /
         (2.0 * h);
}

inline void multi_indices(int d, int order, std::vector<int>& cur,
                          std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == d) {
    int s = 0;
    for (int c : cur) s += c;
    if (s == order) out.push_back(cur);
    return;
  }
  for (int c = 0; c <= order; ++c) {
    cur.push_back(c);
    multi_indices(d, order, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

inline AssumptionReport check_assumption(const PotentialModel& model, double box,
                                         int points_per_axis = 101, int max_order = 2) {
  if (max_order > 4) throw ConfigError("assumption check supports derivative order <= 4");
  if (points_per_axis < 5) throw ConfigError("assumption check needs >= 5 points per axis");
  const int d = model.dimension;
  const double fd_h = 1e-2;
  const double growth_threshold = 1.3;

  AssumptionReport rep;
  rep.box = box;
  rep.max_order = max_order;

  // Sample lattice over the full box; nested boxes are radius fractions of it.
  std::vector<Eigen::VectorXd> pts;
  if (d == 1) {
    for (int i = 0; i < points_per_axis; ++i) {
      Eigen::VectorXd x(1);
      x[0] = -box + 2.0 * box * i / (points_per_axis - 1);
      pts.push_back(x);
    }
  } else {
    // Axis lattices plus diagonal rays keep the cost flat in dimension while
    // still probing mixed directions.
    for (int i = 0; i < points_per_axis; ++i) {
      const double t = -box + 2.0 * box * i / (points_per_axis - 1);
      for (int axis = 0; axis < d; ++axis) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        x[axis] = t;
        pts.push_back(x);
      }
      Eigen::VectorXd diag = Eigen::VectorXd::Constant(d, t / std::sqrt(double(d)));
      pts.push_back(diag);
    }
  }

  double squeeze_up = 0.0, squeeze_lo = 0.0;
  for (const auto& x : pts) {
    const double br = std::sqrt(1.0 + x.squaredNorm());
    const double w = std::pow(br, 2.0 * model.m);
    const double v = eval_potential(model, x);
    squeeze_up = std::max(squeeze_up, v / w);
    // smallest C with (1/C) w - C <= v  <=>  C >= (-v + sqrt(v^2 + 4w)) / 2
    squeeze_lo = std::max(squeeze_lo, 0.5 * (-v + std::sqrt(v * v + 4.0 * w)));
  }
  rep.squeeze_upper = squeeze_up;
  rep.squeeze_lower = squeeze_lo;

  bool all_ok = true;
  for (int order = 0; order <= max_order; ++order) {
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur;
    detail::multi_indices(d, order, cur, alphas);

    double sup_full = 0.0, sup_half = 0.0;
    for (const auto& x : pts) {
      const double r = x.norm();
      const double br = std::sqrt(1.0 + x.squaredNorm());
      const double weight = std::pow(br, 2.0 * model.m - order);
      double dmax = 0.0;
      for (const auto& a : alphas)
        dmax = std::max(dmax, std::abs(detail::partial_derivative(model, x, a, fd_h)));
      const double ratio = dmax / weight;
      sup_full = std::max(sup_full, ratio);
      if (r <= 0.5 * box) sup_half = std::max(sup_half, ratio);
    }

    AssumptionOrderReport orep;
    orep.order = order;
    orep.sup_ratio = sup_full;
    orep.growth = sup_full / std::max(sup_half, 1e-300);
    orep.diverging = orep.growth > growth_threshold;
    if (orep.diverging) all_ok = false;
    rep.orders.push_back(orep);
  }
  rep.pass = all_ok;
  return rep;
}

}  // namespace smoothlab

#endif
