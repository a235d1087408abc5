#ifndef SMOOTHLAB_QUANTUM_HPP
#define SMOOTHLAB_QUANTUM_HPP

#include <gsl/gsl_integration.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "smoothlab/classical.hpp"
#include "smoothlab/errors.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/potential.hpp"
#include "smoothlab/rng.hpp"
#include "smoothlab/weyl.hpp"

namespace smoothlab {

// --- Hamiltonian -----------------------------------------------------------------
//
// P = Op(|xi|^2/2) + diag V(x_j).  The kinetic part is the exact periodic
// spectral Laplacian: a circulant whose DFT multiplier is xi_s^2/2, assembled
// per axis as kern[delta] = (1/n) sum_s e^{2 pi i (s - n/2) delta / n} xi_s^2/2
// (real by the s <-> n-s symmetry).

namespace detail {

inline Eigen::VectorXd kinetic_kernel(const GridSpec& g) {
  const int n = g.n;
  Eigen::VectorXd kern = Eigen::VectorXd::Zero(n);
  for (int delta = 0; delta < n; ++delta) {
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
      const double th = 2.0 * M_PI * (s - n / 2) * delta / n;
      acc += std::cos(th) * 0.5 * g.xi(s) * g.xi(s);
    }
    kern[delta] = acc / n;
  }
  return kern;
}

}  // namespace detail

inline OperatorMatrix build_hamiltonian(const PotentialModel& model, const GridSpec& g) {
  if (model.dimension != g.d) throw ConfigError("potential dimension does not match grid");
  const int n = g.n;
  const Eigen::VectorXd kern = detail::kinetic_kernel(g);
  OperatorMatrix op;
  op.grid = g;
  op.hermitian = true;
  if (g.d == 1) {
    Eigen::MatrixXd P(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) P(j, k) = kern[(j - k + n) % n];
    Eigen::VectorXd xv(1);
    for (int j = 0; j < n; ++j) {
      xv[0] = g.xpos(j);
      P(j, j) += eval_potential(model, xv);
    }
    op.entries = (0.5 * (P + P.transpose())).cast<std::complex<double>>();
  } else {
    const int N = n * n;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        const int row = j1 * n + j2;
        for (int k = 0; k < n; ++k) {
          P(row, k * n + j2) += kern[(j1 - k + n) % n];  // axis 1
          P(row, j1 * n + k) += kern[(j2 - k + n) % n];  // axis 2
        }
      }
    Eigen::VectorXd xv(2);
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        xv[0] = g.xpos(j1);
        xv[1] = g.xpos(j2);
        P(j1 * n + j2, j1 * n + j2) += eval_potential(model, xv);
      }
    op.entries = (0.5 * (P + P.transpose())).cast<std::complex<double>>();
  }
  return op;
}

// --- Spectral calculus -------------------------------------------------------------

struct SpectralData {
  GridSpec grid;
  Eigen::VectorXd eigenvalues;    // ascending
  Eigen::MatrixXcd eigenvectors;  // unitary columns
};

inline SpectralData eigendecompose(const OperatorMatrix& P) {
  const double scale = P.entries.cwiseAbs().maxCoeff();
  if ((P.entries - P.entries.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300))
    throw ConfigError("eigendecompose requires a Hermitian matrix");
  SpectralData sd;
  sd.grid = P.grid;
  // Real-symmetric fast path (the Hamiltonian and every real-symbol operator).
  if (P.entries.imag().cwiseAbs().maxCoeff() <= 1e-13 * std::max(scale, 1e-300)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P.entries.real());
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    sd.eigenvalues = es.eigenvalues();
    sd.eigenvectors = es.eigenvectors().cast<std::complex<double>>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P.entries);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    sd.eigenvalues = es.eigenvalues();
    sd.eigenvectors = es.eigenvectors();
  }
  return sd;
}

inline Eigen::VectorXcd propagate(const SpectralData& sd, const Eigen::VectorXcd& u, double t) {
  Eigen::VectorXcd c = sd.eigenvectors.adjoint() * u;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    const double th = -sd.eigenvalues[k] * t;
    c[k] *= std::complex<double>(std::cos(th), std::sin(th));
  }
  return sd.eigenvectors * c;
}

// Gauss-Legendre nodes/weights on [0, T].
inline void gauss_legendre(int nq, double T, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (nq < 1) throw ConfigError("quadrature needs at least one node");
  gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(nq);
  if (!tab) throw NumericalError("quadrature table allocation failed");
  nodes.resize(nq);
  weights.resize(nq);
  for (int q = 0; q < nq; ++q) {
    double xq = 0.0, wq = 0.0;
    gsl_integration_glfixed_point(0.0, T, q, &xq, &wq, tab);
    nodes[q] = xq;
    weights[q] = wq;
  }
  gsl_integration_glfixed_table_free(tab);
}

// --- Resolved band -----------------------------------------------------------------
//
// The grid faithfully represents states whose energy keeps them away from both
// truncation edges: |xi| below ~0.7 Nyquist and |x| inside the box (potential
// barrier 0.7 V(edge)).  Constants are therefore evaluated on the spectral
// subspace { lambda <= E_band }; the propagator commutes with the projection,
// so the restriction is exact, not an approximation artifact.

inline double resolved_band_cutoff(const PotentialModel& model, const GridSpec& g) {
  Eigen::VectorXd edge = Eigen::VectorXd::Zero(g.d);
  edge[0] = g.L;
  const double kinetic_cap = 0.5 * std::pow(0.7 * g.nyquist(), 2);
  const double barrier_cap = 0.7 * eval_potential(model, edge);
  return std::min(kinetic_cap, barrier_cap);
}

inline int band_index(const SpectralData& sd, double E_band) {
  int k = 0;
  while (k < sd.eigenvalues.size() && sd.eigenvalues[k] < E_band) ++k;
  return k;
}

inline double above_band_mass(const SpectralData& sd, double E_band,
                              const Eigen::VectorXcd& u) {
  const Eigen::VectorXcd c = sd.eigenvectors.adjoint() * u;
  double mass = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (sd.eigenvalues[k] > E_band) mass += std::norm(c[k]);
  return mass;
}

// Mass within `margin` grid points of the box boundary (periodization check).
inline double boundary_mass(const GridSpec& g, const Eigen::VectorXcd& u, int margin = 5) {
  double mass = 0.0;
  const int n = g.n;
  if (g.d == 1) {
    for (int j = 0; j < n; ++j)
      if (j < margin || j >= n - margin) mass += std::norm(u[j]);
  } else {
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2)
        if (j1 < margin || j1 >= n - margin || j2 < margin || j2 >= n - margin)
          mass += std::norm(u[j1 * n + j2]);
  }
  return mass;
}

// --- Smoothing functional and Gram operator -----------------------------------------
//
// S(u) = int_0^T || W Q e^{-itP} u ||^2 dt with W = diag <x_j/R>^{-nu} and
// Q = Op((R^2+p)^{1/4}), by Gauss-Legendre in t.  The same quadrature defines
// the Gram operator G = sum_q w_q e^{i t_q P} Q W^2 Q e^{-i t_q P}, assembled
// in the P-eigenbasis as the Hadamard product core = M o S_phase with
// M = U* (Q W^2 Q) U and S_phase[j,k] = sum_q w_q e^{i (l_j - l_k) t_q},
// so that G = U core U*.

inline Eigen::VectorXd localization_weights(const GridSpec& g, double R, double nu) {
  const int N = g.points();
  Eigen::VectorXd w(N);
  if (g.d == 1) {
    for (int j = 0; j < g.n; ++j)
      w[j] = std::pow(1.0 + g.xpos(j) * g.xpos(j) / (R * R), -0.5 * nu);
  } else {
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int j2 = 0; j2 < g.n; ++j2) {
        const double r2 = g.xpos(j1) * g.xpos(j1) + g.xpos(j2) * g.xpos(j2);
        w[j1 * g.n + j2] = std::pow(1.0 + r2 / (R * R), -0.5 * nu);
      }
  }
  return w;
}

namespace detail {

inline Eigen::MatrixXcd phase_sum(const Eigen::VectorXd& lambda, const Eigen::VectorXd& tq,
                                  const Eigen::VectorXd& wq) {
  const Eigen::Index n = lambda.size(), nq = tq.size();
  Eigen::MatrixXcd E(n, nq);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index q = 0; q < nq; ++q) {
      const double th = lambda[j] * tq[q];
      E(j, q) = std::complex<double>(std::cos(th), std::sin(th));
    }
  return (E * wq.asDiagonal()) * E.adjoint();
}

// M = U* (Q W^2 Q) U in the P-eigenbasis.
inline Eigen::MatrixXcd gram_core_m(const PotentialModel& model, const GridSpec& g,
                                    const SpectralData& sd, double nu, double R) {
  const Eigen::MatrixXcd Q = quantize_symbol(symbol_power(model, 0.25, R, g)).entries;
  const Eigen::VectorXd w = localization_weights(g, R, nu);
  const Eigen::MatrixXcd WQ = w.asDiagonal() * Q;
  const Eigen::MatrixXcd QW2Q = WQ.adjoint() * WQ;
  return sd.eigenvectors.adjoint() * QW2Q * sd.eigenvectors;
}

}  // namespace detail

inline double smoothing_functional(const PotentialModel& model, const GridSpec& g,
                                   const SpectralData& sd, const Eigen::VectorXcd& u, double T,
                                   double nu, double R, int nq = 64) {
  if (nq < 16) throw ConfigError("smoothing functional needs >= 16 quadrature nodes");
  if (std::abs(u.norm() - 1.0) > 1e-8)
    throw ConfigError("smoothing functional expects a unit vector");
  const Eigen::MatrixXcd Q = quantize_symbol(symbol_power(model, 0.25, R, g)).entries;
  const Eigen::VectorXd w = localization_weights(g, R, nu);
  const Eigen::MatrixXcd WQ = w.asDiagonal() * Q;

  Eigen::VectorXd tq, wq;
  gauss_legendre(nq, T, tq, wq);
  const Eigen::VectorXcd cu = sd.eigenvectors.adjoint() * u;
  double val = 0.0;
  Eigen::VectorXcd ph(cu.size()), ut;
  for (int q = 0; q < nq; ++q) {
    for (Eigen::Index k = 0; k < cu.size(); ++k) {
      const double th = -sd.eigenvalues[k] * tq[q];
      ph[k] = cu[k] * std::complex<double>(std::cos(th), std::sin(th));
    }
    ut = sd.eigenvectors * ph;
    val += wq[q] * (WQ * ut).squaredNorm();
  }
  return val;
}

inline OperatorMatrix gram_operator(const PotentialModel& model, const GridSpec& g,
                                    const SpectralData& sd, double T, double nu, double R,
                                    int nq = 64) {
  Eigen::VectorXd tq, wq;
  gauss_legendre(nq, T, tq, wq);
  const Eigen::MatrixXcd M = detail::gram_core_m(model, g, sd, nu, R);
  const Eigen::MatrixXcd S = detail::phase_sum(sd.eigenvalues, tq, wq);
  const Eigen::MatrixXcd core = M.cwiseProduct(S);
  OperatorMatrix G;
  G.grid = g;
  G.entries = sd.eigenvectors * core * sd.eigenvectors.adjoint();
  G.entries = 0.5 * (G.entries + G.entries.adjoint()).eval();
  G.hermitian = true;
  return G;
}

// Gram operator compressed to the resolved band { lambda < E_band }: the
// leading kband x kband block of the eigenbasis core.  The propagator
// commutes with the spectral projection, so this is the exact Gram form on
// that subspace.
struct BandedGram {
  Eigen::MatrixXcd core;  // kband x kband, P-eigenbasis
  int kband = 0;
  double E_band = 0.0;
  double R = 0.0, nu = 0.0, T = 0.0;
  int quadrature_nodes = 0;
};

inline BandedGram banded_gram(const PotentialModel& model, const GridSpec& g,
                              const SpectralData& sd, double T, double nu, double R,
                              int nq = 64) {
  BandedGram bg;
  bg.E_band = resolved_band_cutoff(model, g);
  bg.kband = band_index(sd, bg.E_band);
  bg.R = R;
  bg.nu = nu;
  bg.T = T;
  bg.quadrature_nodes = nq;
  if (bg.kband < 2) throw ConfigError("resolved band too small; enlarge the grid");
  Eigen::VectorXd tq, wq;
  gauss_legendre(nq, T, tq, wq);
  const Eigen::MatrixXcd M = detail::gram_core_m(model, g, sd, nu, R);
  const Eigen::MatrixXcd S = detail::phase_sum(sd.eigenvalues, tq, wq);
  bg.core = M.cwiseProduct(S).topLeftCorner(bg.kband, bg.kband);
  bg.core = 0.5 * (bg.core + bg.core.adjoint()).eval();
  return bg;
}

// --- Top eigenvalue ------------------------------------------------------------------

enum class EigMethod { power_iteration, dense_eig };

struct QuantumConstantEstimate {
  double value = 0.0;
  Eigen::VectorXcd maximizer;  // in the basis of the supplied matrix
  EigMethod method = EigMethod::power_iteration;
  bool fallback_used = false;
  int iterations = 0;
  int quadrature_nodes = 0;
  double R = 0.0, nu = 0.0, T = 0.0;
};

inline QuantumConstantEstimate top_eigenpair(const Eigen::MatrixXcd& G, EigMethod method) {
  QuantumConstantEstimate est;
  est.method = method;
  const Eigen::Index n = G.rows();
  if (method == EigMethod::dense_eig) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    est.value = es.eigenvalues()[n - 1];
    est.maximizer = es.eigenvectors().col(n - 1);
    return est;
  }
  // Power iteration with Rayleigh-quotient stopping.
  Rng rng(0x5eed0001u);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::complex<double>(rng.normal(), rng.normal());
  v /= v.norm();
  double rho_prev = 0.0;
  const int max_iters = 10000;
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::VectorXcd gv = G * v;
    const double rho = std::real(v.dot(gv));  // v^H G v
    const double nrm = gv.norm();
    if (nrm == 0.0) {  // G v = 0: v is a null vector, top eigenvalue 0 for PSD G
      est.value = 0.0;
      est.maximizer = v;
      est.iterations = it;
      return est;
    }
    v = gv / nrm;
    est.iterations = it;
    if (it > 1 && std::abs(rho - rho_prev) <= 1e-10 * std::max(std::abs(rho), 1e-300)) {
      est.value = std::real(v.dot(G * v));
      est.maximizer = v;
      return est;
    }
    rho_prev = rho;
  }
  // Stagnation (e.g. a degenerate top pair): fall back to the dense solver.
  est = top_eigenpair(G, EigMethod::dense_eig);
  est.method = EigMethod::power_iteration;
  est.fallback_used = true;
  est.iterations = max_iters;
  return est;
}

inline QuantumConstantEstimate quantum_constant(const BandedGram& bg,
                                                EigMethod method = EigMethod::power_iteration) {
  QuantumConstantEstimate est = top_eigenpair(bg.core, method);
  est.quadrature_nodes = bg.quadrature_nodes;
  est.R = bg.R;
  est.nu = bg.nu;
  est.T = bg.T;
  return est;
}

inline QuantumConstantEstimate quantum_constant(const OperatorMatrix& G,
                                                EigMethod method = EigMethod::power_iteration) {
  if (!G.hermitian) throw ConfigError("quantum constant needs a Hermitian Gram matrix");
  return top_eigenpair(G.entries, method);
}

// Band content of a banded-Gram maximizer near the cutoff: the coefficient
// mass in the top decade [0.8 E_band, E_band].  Small mass certifies the
// maximizer does not press against the truncation (band_ok).
inline double top_decade_mass(const SpectralData& sd, const BandedGram& bg,
                              const Eigen::VectorXcd& maximizer) {
  double mass = 0.0;
  for (Eigen::Index k = 0; k < maximizer.size(); ++k)
    if (sd.eigenvalues[k] > 0.8 * bg.E_band) mass += std::norm(maximizer[k]);
  return mass;
}

// --- Propagated-observable residual ---------------------------------------------------
//
// Measures || e^{itP} Op(a) e^{-itP} - Op(a o phi^t) || / || Op(a) ||, where
// a o phi^t is sampled by integrating each midpoint x momentum node forward
// along the classical flow and evaluating a there.  Both the raw norm on the
// whole grid and the norm compressed to the resolved band are reported: grid
// modes above the band carry no faithful dynamics, and their error floor
// otherwise dominates the quantity under study.

struct EgorovReport {
  double residual_raw = 0.0;
  double residual_banded = 0.0;
  int kband = 0;
  double E_band = 0.0;
};

inline EgorovReport egorov_residual(const PotentialModel& model, const GridSpec& g,
                                    const SpectralData& sd,
                                    const std::function<double(double, double)>& a,
                                    const std::string& label, double t, double h = 1e-3) {
  if (g.d != 1) throw ConfigError("propagated-observable residual implemented for d = 1");
  if (t < 0.0) throw ConfigError("residual time must be >= 0");

  const SymbolGrid a0 = make_symbol_1d(g, label, a);

  SymbolGrid at;
  at.grid = g;
  at.label = label + " transported";
  at.is_real = true;
  at.values.resize(g.midpoint_nodes(), g.points());
  const int n = g.n, mids = g.midpoints_per_axis();
  const int N = t > 0.0 ? static_cast<int>(std::ceil(t / h)) : 0;
  const double hh = N > 0 ? t / N : 0.0;
  for (int m = 0; m < mids; ++m) {
    const double x0 = g.midpoint(m);
    for (int s = 0; s < n; ++s) {
      double x = x0, xi = g.xi(s);
      for (int k = 0; k < N; ++k) {
        xi -= 0.5 * hh * eval_gradient_1d(model, x);
        x += hh * xi;
        xi -= 0.5 * hh * eval_gradient_1d(model, x);
      }
      at.values(m, s) = a(x, xi);
    }
  }

  const Eigen::MatrixXcd A0 = quantize_symbol(a0).entries;
  const Eigen::MatrixXcd At = quantize_symbol(at).entries;

  // In the P-eigenbasis the conjugation is a pure phase Hadamard factor.
  const Eigen::MatrixXcd A0e = sd.eigenvectors.adjoint() * A0 * sd.eigenvectors;
  const Eigen::MatrixXcd Ate = sd.eigenvectors.adjoint() * At * sd.eigenvectors;
  const Eigen::Index nn = A0e.rows();
  Eigen::MatrixXcd Rt(nn, nn);
  for (Eigen::Index j = 0; j < nn; ++j)
    for (Eigen::Index k = 0; k < nn; ++k) {
      const double th = (sd.eigenvalues[j] - sd.eigenvalues[k]) * t;
      Rt(j, k) = A0e(j, k) * std::complex<double>(std::cos(th), std::sin(th)) - Ate(j, k);
    }

  EgorovReport rep;
  rep.E_band = resolved_band_cutoff(model, g);
  rep.kband = band_index(sd, rep.E_band);
  rep.residual_raw = spectral_norm(Rt) / spectral_norm(A0);
  rep.residual_banded = spectral_norm(Rt.topLeftCorner(rep.kband, rep.kband)) /
                        spectral_norm(A0e.topLeftCorner(rep.kband, rep.kband));
  return rep;
}

// Diagnostic: spectral-norm gap between the quantized symbol (R^2+p)^{1/4}
// and the functional-calculus operator (R^2+P)^{1/4} on the resolved band.
// Reported for context only; the two agree to leading order but not exactly.
inline double quarter_power_gap(const PotentialModel& model, const GridSpec& g,
                                const SpectralData& sd, double R) {
  const Eigen::MatrixXcd Q = quantize_symbol(symbol_power(model, 0.25, R, g)).entries;
  const Eigen::MatrixXcd Qe = sd.eigenvectors.adjoint() * Q * sd.eigenvectors;
  const double E_band = resolved_band_cutoff(model, g);
  const int kb = band_index(sd, E_band);
  Eigen::MatrixXcd D = Qe.topLeftCorner(kb, kb);
  for (int k = 0; k < kb; ++k) D(k, k) -= std::pow(R * R + sd.eigenvalues[k], 0.25);
  return spectral_norm(D);
}

}  // namespace smoothlab

#endif
