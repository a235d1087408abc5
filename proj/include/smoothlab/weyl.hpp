#ifndef SMOOTHLAB_WEYL_HPP
#define SMOOTHLAB_WEYL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "smoothlab/errors.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/potential.hpp"

namespace smoothlab {

// --- Weyl quantization on the periodic grid -------------------------------------
//
// Continuum rule: [Op(a)u](x) = (2 pi)^{-d} int int e^{i xi (x-y)} a((x+y)/2, xi) u(y) dy dxi.
// On the grid the y-integral becomes dx^d times a sum over grid points and the
// xi-integral a sum over the n^d dual momenta weighted by (pi/L)^d, giving
//   A[j,k] = (1/n^d) sum_s a((x_j+x_k)/2, xi_s) e^{i xi_s (x_j - x_k)}.
// With xi_s = (s - n/2) pi/L and x_j - x_k = (j-k) dx the phase is
// exp(2 pi i (s - n/2)(j-k)/n), periodic in (j-k) mod n, so per axis
//   B[m, delta] = sum_s vals[m, s] exp(2 pi i (s - n/2) delta / n)
// and A[j,k] = B[j+k, (j-k) mod n] / n.  Real symbols use two real GEMMs
// (cos/sin parts of the phase matrix).

namespace detail {

inline void phase_tables(int n, Eigen::MatrixXd& C, Eigen::MatrixXd& S) {
  C.resize(n, n);
  S.resize(n, n);
  for (int s = 0; s < n; ++s)
    for (int delta = 0; delta < n; ++delta) {
      const double th = 2.0 * M_PI * (s - n / 2) * delta / n;
      C(s, delta) = std::cos(th);
      S(s, delta) = std::sin(th);
    }
}

inline Eigen::MatrixXcd quantize_raw_1d(const SymbolGrid& sym) {
  const int n = sym.grid.n;
  Eigen::MatrixXd C, S;
  phase_tables(n, C, S);
  Eigen::MatrixXcd B(2 * n - 1, n);
  if (sym.is_real) {
    const Eigen::MatrixXd vals = sym.values.real();
    const Eigen::MatrixXd Bre = vals * C;
    const Eigen::MatrixXd Bim = vals * S;
    B.real() = Bre;
    B.imag() = Bim;
  } else {
    Eigen::MatrixXcd E(n, n);
    E.real() = C;
    E.imag() = S;
    B = sym.values * E;
  }
  Eigen::MatrixXcd A(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) A(j, k) = B(j + k, (j - k + n) % n) / double(n);
  return A;
}

inline Eigen::MatrixXcd quantize_raw_2d(const SymbolGrid& sym) {
  const int n = sym.grid.n, mids = 2 * n - 1;
  Eigen::MatrixXd C, S;
  phase_tables(n, C, S);
  Eigen::MatrixXcd E(n, n);
  E.real() = C;
  E.imag() = S;
  // Per midpoint pair: B_m = E^T V_m E with V_m the n x n momentum block.
  Eigen::MatrixXcd B(mids * mids, n * n);
  Eigen::MatrixXcd Vm(n, n), Bm(n, n);
  for (int row = 0; row < mids * mids; ++row) {
    for (int s1 = 0; s1 < n; ++s1)
      for (int s2 = 0; s2 < n; ++s2) Vm(s1, s2) = sym.values(row, s1 * n + s2);
    Bm.noalias() = E.transpose() * Vm * E;
    for (int d1 = 0; d1 < n; ++d1)
      for (int d2 = 0; d2 < n; ++d2) B(row, d1 * n + d2) = Bm(d1, d2);
  }
  const int N = n * n;
  Eigen::MatrixXcd A(N, N);
  const double scale = 1.0 / double(N);
  for (int j1 = 0; j1 < n; ++j1)
    for (int j2 = 0; j2 < n; ++j2)
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
          A(j1 * n + j2, k1 * n + k2) =
              scale * B((j1 + k1) * mids + (j2 + k2),
                        ((j1 - k1 + n) % n) * n + ((j2 - k2 + n) % n));
  return A;
}

inline Eigen::MatrixXcd quantize_raw(const SymbolGrid& sym) {
  check_symbol_shape(sym);
  return sym.grid.d == 1 ? quantize_raw_1d(sym) : quantize_raw_2d(sym);
}

}  // namespace detail

inline OperatorMatrix quantize_symbol(const SymbolGrid& sym) {
  OperatorMatrix op;
  op.grid = sym.grid;
  op.entries = detail::quantize_raw(sym);
  if (sym.is_real) {
    op.entries = 0.5 * (op.entries + op.entries.adjoint()).eval();
    op.hermitian = true;
  }
  return op;
}

// Relative self-adjointness defect of the raw (unsymmetrized) quantization —
// a periodization-error diagnostic, small when the symbol fits the box.
inline double quantize_asymmetry(const SymbolGrid& sym) {
  const Eigen::MatrixXcd A = detail::quantize_raw(sym);
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (A - A.adjoint()).cwiseAbs().maxCoeff() / scale;
}

// Spectral norm (largest singular value) via the Hermitian square.
inline double spectral_norm(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.adjoint() * M,
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on M*M");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// --- Standard symbols ------------------------------------------------------------

// (R^2 + p(x, xi))^gamma, the elliptic weight family; gamma <= 1/2 keeps it
// sub-linear in the energy so the grid truncation stays benign.
inline SymbolGrid symbol_power(const PotentialModel& model, double gamma, double R,
                               const GridSpec& g) {
  if (!(R >= 1.0)) throw ConfigError("symbol scale R must be >= 1");
  if (gamma > 0.5) throw ConfigError("symbol power gamma must be <= 1/2");
  SymbolGrid sym = make_symbol(g, "(R^2+p)^gamma", [&](const Eigen::VectorXd& x,
                                                       const Eigen::VectorXd& k) {
    const double p = 0.5 * k.squaredNorm() + eval_potential(model, x);
    return std::pow(R * R + p, gamma);
  });
  return sym;
}

// f_R(x, xi) = <x/R>^{-2 nu} sqrt(R^2 + p(x, xi)): localized-in-x weight times
// the square-root energy gain.
inline SymbolGrid symbol_fR(const PotentialModel& model, double nu, double R,
                            const GridSpec& g) {
  if (!(R >= 1.0)) throw ConfigError("symbol scale R must be >= 1");
  if (!(nu > 0.5)) throw ConfigError("decay exponent nu must exceed 1/2");
  SymbolGrid sym = make_symbol(g, "f_R", [&](const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& k) {
    const double p = 0.5 * k.squaredNorm() + eval_potential(model, x);
    const double br2 = 1.0 + x.squaredNorm() / (R * R);
    return std::pow(br2, -nu) * std::sqrt(R * R + p);
  });
  return sym;
}

// --- Finite-difference seminorm surrogates ---------------------------------------

// Max absolute grid derivative up to total order max_order (d = 1 symbols:
// rows are the x midpoints with spacing dx/2, columns the momenta with
// spacing pi/L).  Surrogate for the symbol-class seminorms.
inline double seminorm_surrogate(const SymbolGrid& sym, int max_order = 4) {
  if (sym.grid.d != 1) throw ConfigError("seminorm surrogate implemented for d = 1");
  const double hx = 0.5 * sym.grid.dx(), hk = sym.grid.dxi();
  double best = sym.values.cwiseAbs().maxCoeff();
  std::vector<Eigen::MatrixXd> level{sym.values.real()};
  if (!sym.is_real) level.push_back(sym.values.imag());
  for (int order = 1; order <= max_order; ++order) {
    std::vector<Eigen::MatrixXd> next;
    for (const auto& a : level) {
      if (a.rows() > 1) {
        Eigen::MatrixXd dX = (a.bottomRows(a.rows() - 1) - a.topRows(a.rows() - 1)) / hx;
        best = std::max(best, dX.cwiseAbs().maxCoeff());
        next.push_back(std::move(dX));
      }
      if (a.cols() > 1) {
        Eigen::MatrixXd dK = (a.rightCols(a.cols() - 1) - a.leftCols(a.cols() - 1)) / hk;
        best = std::max(best, dK.cwiseAbs().maxCoeff());
        next.push_back(std::move(dK));
      }
    }
    level = std::move(next);
  }
  return best;
}

// First-order-only variant used by the composition certificate.
inline double gradient_surrogate(const SymbolGrid& sym) { return seminorm_surrogate(sym, 1); }

// --- Composition residual ---------------------------------------------------------
//
// Op(a1) Op(a2) = Op(a1 a2) + lower order.  The raw residual norm on the
// periodic grid is polluted by wrap-around at the box/Nyquist edges, so the
// certificate compresses with the window projectors |x| <= L/2 (position) and
// |xi| <= Xi/2 (frequency, conjugated through the unitary DFT): inside the
// window the discretization matches the continuum calculus.

struct CompositionReport {
  double residual_raw = 0.0;       // || Op(a1)Op(a2) - Op(a1 a2) ||
  double residual_windowed = 0.0;  // same, compressed to the half-size window
  double gradient_product = 0.0;   // surrogate |a1|_grad * |a2|_grad
  double control_factor = 0.0;     // residual_windowed / gradient_product
};

namespace detail {

inline Eigen::MatrixXcd dft_matrix(const GridSpec& g) {
  const int n = g.n;
  Eigen::MatrixXcd F(n, n);
  const double scale = 1.0 / std::sqrt(double(n));
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j) {
      const double th = -g.xi(s) * g.xpos(j);
      F(s, j) = scale * std::complex<double>(std::cos(th), std::sin(th));
    }
  return F;
}

}  // namespace detail

inline CompositionReport compose_residual(const SymbolGrid& a1, const SymbolGrid& a2) {
  if (a1.grid.d != 1 || a2.grid.d != 1)
    throw ConfigError("composition certificate implemented for d = 1");
  if (a1.grid.n != a2.grid.n || a1.grid.L != a2.grid.L)
    throw ConfigError("composition requires a shared grid");
  const GridSpec& g = a1.grid;
  const int n = g.n;

  SymbolGrid prod;
  prod.grid = g;
  prod.label = a1.label + "*" + a2.label;
  prod.is_real = a1.is_real && a2.is_real;
  prod.values = a1.values.cwiseProduct(a2.values);

  const Eigen::MatrixXcd A1 = quantize_symbol(a1).entries;
  const Eigen::MatrixXcd A2 = quantize_symbol(a2).entries;
  const Eigen::MatrixXcd A12 = quantize_symbol(prod).entries;
  const Eigen::MatrixXcd Rm = A1 * A2 - A12;

  CompositionReport rep;
  rep.residual_raw = spectral_norm(Rm);

  const Eigen::MatrixXcd F = detail::dft_matrix(g);
  Eigen::VectorXd mx(n), mk(n);
  for (int j = 0; j < n; ++j) mx[j] = std::abs(g.xpos(j)) <= 0.5 * g.L ? 1.0 : 0.0;
  for (int s = 0; s < n; ++s) mk[s] = std::abs(g.xi(s)) <= 0.5 * g.nyquist() ? 1.0 : 0.0;
  const Eigen::MatrixXcd Pk = F.adjoint() * mk.asDiagonal() * F;
  const Eigen::MatrixXcd W = mx.asDiagonal() * Pk;
  rep.residual_windowed = spectral_norm(W * Rm * W.adjoint());

  rep.gradient_product = gradient_surrogate(a1) * gradient_surrogate(a2);
  rep.control_factor =
      rep.gradient_product > 0.0 ? rep.residual_windowed / rep.gradient_product : 0.0;
  return rep;
}

// --- Lower-bound certificate --------------------------------------------------------
//
// For a real symbol a >= 0 the quantization is bounded below by a curvature
// term: min eig Op(a) >= -c * |Hess a|.  Reports the measured floor, the
// axis-aligned second-difference surrogate for |Hess a|, and the c that the
// pair certifies.

struct GaardingReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double hessian_surrogate = 0.0;
  double required_c = 0.0;  // max(0, -min_eig) / hessian_surrogate
};

inline GaardingReport gaarding_floor(const SymbolGrid& a) {
  if (!a.is_real) throw ConfigError("lower-bound certificate needs a real symbol");
  if (a.values.real().minCoeff() < 0.0)
    throw ConfigError("lower-bound certificate needs a pointwise non-negative symbol");
  if (a.grid.d != 1) throw ConfigError("lower-bound certificate implemented for d = 1");

  const OperatorMatrix op = quantize_symbol(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on Op(a)");

  GaardingReport rep;
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.max_eigenvalue = es.eigenvalues().maxCoeff();

  const Eigen::MatrixXd v = a.values.real();
  const double hx = 0.5 * a.grid.dx(), hk = a.grid.dxi();
  double hess = 0.0;
  if (v.rows() > 2)
    hess = std::max(hess, (v.topRows(v.rows() - 2) - 2.0 * v.middleRows(1, v.rows() - 2) +
                           v.bottomRows(v.rows() - 2))
                              .cwiseAbs()
                              .maxCoeff() /
                              (hx * hx));
  if (v.cols() > 2)
    hess = std::max(hess, (v.leftCols(v.cols() - 2) - 2.0 * v.middleCols(1, v.cols() - 2) +
                           v.rightCols(v.cols() - 2))
                              .cwiseAbs()
                              .maxCoeff() /
                              (hk * hk));
  rep.hessian_surrogate = hess;
  rep.required_c = hess > 0.0 ? std::max(0.0, -rep.min_eigenvalue) / hess : 0.0;
  return rep;
}

}  // namespace smoothlab

#endif
