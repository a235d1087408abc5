#ifndef SMOOTHLAB_WAVEPACKET_HPP
#define SMOOTHLAB_WAVEPACKET_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "smoothlab/classical.hpp"
#include "smoothlab/errors.hpp"
#include "smoothlab/grid.hpp"
#include "smoothlab/potential.hpp"
#include "smoothlab/quantum.hpp"
#include "smoothlab/weyl.hpp"

namespace smoothlab {

// Unit-width Gaussian wave packet u(x) = pi^{-d/4} exp(-|x-x0|^2/2) e^{i xi0 x},
// microlocalized at the phase-space center (x0, xi0).  Width is fixed: the
// probe mechanism depends on the exact |f(rho)|^2 = pi^{-d} e^{-|rho|^2}
// phase-space profile of this state.
struct CoherentState {
  PhasePoint center;
  Eigen::VectorXcd vector;  // unit norm on the grid
  GridSpec grid;
};

// Position/momentum spread of the packet: |u|^2 has std 1/sqrt(2) per axis.
inline double coherent_sigma() { return 1.0 / std::sqrt(2.0); }

inline CoherentState coherent_state(const PhasePoint& center, const GridSpec& g) {
  if (center.x.size() != g.d) throw ConfigError("coherent state center dimension mismatch");
  const double margin = 5.0 * coherent_sigma();
  for (int i = 0; i < g.d; ++i) {
    const double xm = g.L - std::abs(center.x[i]);
    const double km = g.nyquist() - std::abs(center.xi[i]);
    if (xm < margin || km < margin) {
      std::ostringstream os;
      os << "coherent state center too close to the resolved box: position margin " << xm
         << ", frequency margin " << km << ", need " << margin;
      throw ConfigError(os.str());
    }
  }
  CoherentState cs;
  cs.center = center;
  cs.grid = g;
  cs.vector.resize(g.points());
  const int n = g.n;
  if (g.d == 1) {
    for (int j = 0; j < n; ++j) {
      const double dxj = g.xpos(j) - center.x[0];
      const double th = center.xi[0] * g.xpos(j);
      cs.vector[j] = std::exp(-0.5 * dxj * dxj) *
                     std::complex<double>(std::cos(th), std::sin(th));
    }
  } else {
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        const double d1 = g.xpos(j1) - center.x[0];
        const double d2 = g.xpos(j2) - center.x[1];
        const double th = center.xi[0] * g.xpos(j1) + center.xi[1] * g.xpos(j2);
        cs.vector[j1 * n + j2] = std::exp(-0.5 * (d1 * d1 + d2 * d2)) *
                                 std::complex<double>(std::cos(th), std::sin(th));
      }
  }
  cs.vector /= cs.vector.norm();
  return cs;
}

inline double position_expectation(const CoherentState& cs, int axis = 0) {
  const GridSpec& g = cs.grid;
  double acc = 0.0;
  if (g.d == 1) {
    for (int j = 0; j < g.n; ++j) acc += g.xpos(j) * std::norm(cs.vector[j]);
  } else {
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int j2 = 0; j2 < g.n; ++j2)
        acc += g.xpos(axis == 0 ? j1 : j2) * std::norm(cs.vector[j1 * g.n + j2]);
  }
  return acc;
}

inline double momentum_expectation(const CoherentState& cs) {
  const GridSpec& g = cs.grid;
  if (g.d != 1) throw ConfigError("momentum expectation implemented for d = 1");
  const Eigen::MatrixXcd F = detail::dft_matrix(g);
  const Eigen::VectorXcd uh = F * cs.vector;
  double acc = 0.0;
  for (int s = 0; s < g.n; ++s) acc += g.xi(s) * std::norm(uh[s]);
  return acc;
}

// Closed-form modulus of the overlap of two unit-width packets:
// |(u1, u2)| = exp(-|rho1 - rho2|^2 / 4).
inline double coherent_overlap_closed_form(const PhasePoint& a, const PhasePoint& b) {
  const double d2 = (a.x - b.x).squaredNorm() + (a.xi - b.xi).squaredNorm();
  return std::exp(-0.25 * d2);
}

// --- Two-path symbol average -----------------------------------------------------
//
// (u, Op(a) u) = pi^{-d} int a(rho0 + rho) e^{-|rho|^2} d rho for the packet at
// rho0 — exact in the continuum.  Both sides are computed: the displaced
// Gaussian quadrature on the symbol lattice (6-sigma window; the tail beyond
// it is < 1e-14) and the matrix quadratic form through the quantization.

struct GaussianAverageReport {
  double quadrature = 0.0;
  double matrix = 0.0;
  double rel_gap = 0.0;
};

inline GaussianAverageReport gaussian_symbol_average(const SymbolGrid& a,
                                                     const PhasePoint& center) {
  if (a.grid.d != 1) throw ConfigError("two-path symbol average implemented for d = 1");
  const GridSpec& g = a.grid;
  const double x0 = center.x[0], k0 = center.xi[0];

  double quad = 0.0;
  const double cell = (0.5 * g.dx()) * g.dxi() / M_PI;
  for (int m = 0; m < g.midpoints_per_axis(); ++m) {
    const double dxm = g.midpoint(m) - x0;
    if (std::abs(dxm) > 6.0) continue;
    for (int s = 0; s < g.n; ++s) {
      const double dks = g.xi(s) - k0;
      if (std::abs(dks) > 6.0) continue;
      quad += std::real(a.values(m, s)) * std::exp(-(dxm * dxm + dks * dks)) * cell;
    }
  }

  const CoherentState u = coherent_state(center, g);
  const OperatorMatrix A = quantize_symbol(a);
  const double mat = std::real(u.vector.dot(A.entries * u.vector));

  GaussianAverageReport rep;
  rep.quadrature = quad;
  rep.matrix = mat;
  rep.rel_gap = std::abs(mat - quad) / std::max(std::abs(mat), 1e-12);
  return rep;
}

// --- Probe ------------------------------------------------------------------------
//
// The lower-bound mechanism: the smoothing functional of the packet at rho0
// concentrates, as R grows, on the classical trajectory integral a_R(rho0).
// Reported per (center, R): S (quantum), A (classical orbit integral), Abar
// (Gaussian-smeared classical value), their ratios, and the sup certificate
// S <= Q0 + slack against the band-compressed Gram top eigenvalue.

struct ProbeReport {
  PhasePoint center;
  double R = 0.0, nu = 0.0, T = 0.0;
  bool accepted = false;
  std::string reason;  // rejection reason when !accepted
  double S = 0.0;      // smoothing functional of the packet
  double A = 0.0;      // a_R(center) along the integrated orbit
  double Abar = 0.0;   // displaced-Gaussian average of a_R around the center
  double ratio_S_A = 0.0;
  double ratio_Abar_A = 0.0;
  double Q0 = 0.0;  // band-compressed Gram top eigenvalue
  bool sup_certified = false;
  double above_band = 0.0;  // packet mass above the resolved band
};

// Batch version sharing the orbit sweep across the R list; grams must all
// carry the same (T, nu) and ascending R.
inline std::vector<ProbeReport> probe_lower_bounds(const PotentialModel& model,
                                                   const GridSpec& g, const SpectralData& sd,
                                                   const std::vector<BandedGram>& grams,
                                                   const PhasePoint& center, double h = 1e-3) {
  if (grams.empty()) throw ConfigError("probe needs at least one Gram block");
  if (g.d != 1) throw ConfigError("probe implemented for d = 1");
  const double T = grams.front().T, nu = grams.front().nu;
  for (const auto& bg : grams)
    if (bg.T != T || bg.nu != nu) throw ConfigError("probe Gram blocks must share (T, nu)");

  std::vector<ProbeReport> out(grams.size());
  for (std::size_t i = 0; i < grams.size(); ++i) {
    out[i].center = center;
    out[i].R = grams[i].R;
    out[i].nu = nu;
    out[i].T = T;
  }

  // Containment: the whole orbit must keep the packet 5 sigma inside the
  // resolved box in both position and frequency.
  const double margin = 5.0 * coherent_sigma();
  {
    const Trajectory orbit = integrate_flow(model, center, T, h);
    const double xmax = orbit.xs.cwiseAbs().maxCoeff();
    const double kmax = orbit.xis.cwiseAbs().maxCoeff();
    if (xmax + margin > g.L || kmax + margin > g.nyquist()) {
      std::ostringstream os;
      os << "orbit leaves the resolved box: max |x|=" << xmax << " (box " << g.L
         << "), max |xi|=" << kmax << " (Nyquist " << g.nyquist() << "), margin " << margin;
      for (auto& rep : out) rep.reason = os.str();
      return out;
    }
  }

  const CoherentState u = coherent_state(center, g);
  const Eigen::VectorXcd cu = sd.eigenvectors.adjoint() * u.vector;

  // A: the orbit integral at the center, one streaming pass for every R.
  std::vector<double> radii;
  for (const auto& bg : grams) radii.push_back(bg.R);
  const auto Avals = escape_weight_integrals_streaming(model, center, T, h, radii, nu);

  // Abar: displaced-Gaussian smear of a_R, one orbit per window node, all R
  // accumulated in the same pass.  Window: spacing 0.25 out to radius 6; the
  // e^{-|rho|^2} tail beyond is < 1e-14 of the mass.
  std::vector<double> abar(grams.size(), 0.0);
  const double spacing = 0.25, reach = 6.0;
  const int half = static_cast<int>(std::round(reach / spacing));
  for (int ix = -half; ix <= half; ++ix)
    for (int ik = -half; ik <= half; ++ik) {
      const double ox = ix * spacing, ok = ik * spacing;
      const double wnode = std::exp(-(ox * ox + ok * ok)) / M_PI * spacing * spacing;
      if (wnode < 1e-18) continue;
      const PhasePoint node = phase_point_1d(center.x[0] + ox, center.xi[0] + ok);
      const auto vals = escape_weight_integrals_streaming(model, node, T, h, radii, nu);
      for (std::size_t i = 0; i < grams.size(); ++i) abar[i] += wnode * vals[i].value;
    }

  for (std::size_t i = 0; i < grams.size(); ++i) {
    ProbeReport& rep = out[i];
    const BandedGram& bg = grams[i];
    rep.above_band = above_band_mass(sd, bg.E_band, u.vector);
    if (rep.above_band > 1e-6) {
      std::ostringstream os;
      os << "packet mass above the resolved band: " << rep.above_band;
      rep.reason = os.str();
      continue;
    }
    const Eigen::VectorXcd cb = cu.head(bg.kband);
    rep.S = std::real(cb.dot(bg.core * cb));
    rep.A = Avals[i].value;
    rep.Abar = abar[i];
    rep.ratio_S_A = rep.S / rep.A;
    rep.ratio_Abar_A = rep.Abar / rep.A;
    rep.Q0 = quantum_constant(bg, EigMethod::dense_eig).value;
    rep.sup_certified = rep.S <= rep.Q0 + 1e-9;
    rep.accepted = true;
  }
  return out;
}

inline ProbeReport probe_lower_bound(const PotentialModel& model, const GridSpec& g,
                                     const SpectralData& sd, const BandedGram& bg,
                                     const PhasePoint& center, double h = 1e-3) {
  return probe_lower_bounds(model, g, sd, {bg}, center, h).front();
}

}  // namespace smoothlab

#endif
