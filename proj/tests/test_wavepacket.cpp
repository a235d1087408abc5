// Gaussian packets as microlocal probes: moments, overlaps, transport
// fidelity under the propagator, the two-path symbol average, and the
// orbit-integral lower-bound table.

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "smoothlab/quantum.hpp"
#include "smoothlab/rng.hpp"
#include "smoothlab/wavepacket.hpp"

using namespace smoothlab;

namespace {

const PotentialModel kHarmonic = make_model(PotentialKind::harmonic, 1.0, {}, 1);

}  // namespace

TEST(Packet, NormAndMoments) {
  const GridSpec g = build_grid(1, 256, 24.0);
  const CoherentState cs = coherent_state(phase_point_1d(0.6, 0.0), g);
  EXPECT_NEAR(cs.vector.norm(), 1.0, 1e-12);
  EXPECT_NEAR(position_expectation(cs), 0.6, 1e-9);
  EXPECT_NEAR(momentum_expectation(cs), 0.0, 1e-9);

  const CoherentState cs2 = coherent_state(phase_point_1d(-1.0, 2.0), g);
  EXPECT_NEAR(position_expectation(cs2), -1.0, 1e-9);
  EXPECT_NEAR(momentum_expectation(cs2), 2.0, 1e-9);
}

TEST(Packet, OverlapClosedForm) {
  const GridSpec g = build_grid(1, 256, 24.0);
  const PhasePoint a = phase_point_1d(0.0, 0.0);
  for (const PhasePoint& b :
       {phase_point_1d(1.0, 0.0), phase_point_1d(0.0, 1.5), phase_point_1d(-0.7, 0.9)}) {
    const CoherentState ua = coherent_state(a, g), ub = coherent_state(b, g);
    const double got = std::abs(ua.vector.dot(ub.vector));
    EXPECT_NEAR(got, coherent_overlap_closed_form(a, b), 1e-8);
  }
}

TEST(Packet, RejectsCentersNearTheBoxEdge) {
  const GridSpec g = build_grid(1, 128, 8.0);
  EXPECT_THROW(coherent_state(phase_point_1d(7.0, 0.0), g), ConfigError);     // 5 sigma > 1
  EXPECT_THROW(coherent_state(phase_point_1d(0.0, g.nyquist() - 0.5), g), ConfigError);
  EXPECT_NO_THROW(coherent_state(phase_point_1d(2.0, 1.0), g));
}

TEST(Packet, TransportFidelityAlongTheRotationFlow) {
  // For the oscillator the unit-width packet is exactly coherent: after time
  // t it is the packet at the rotated center, up to a global phase.
  const GridSpec g = build_grid(1, 256, 24.0);
  const OperatorMatrix P = build_hamiltonian(kHarmonic, g);
  const SpectralData sd = eigendecompose(P);
  const double x0 = 2.0, k0 = 1.0, t = 0.7;
  const CoherentState u0 = coherent_state(phase_point_1d(x0, k0), g);
  const Eigen::VectorXcd ut = propagate(sd, u0.vector, t);
  const PhasePoint rot = phase_point_1d(x0 * std::cos(t) + k0 * std::sin(t),
                                        k0 * std::cos(t) - x0 * std::sin(t));
  const CoherentState v = coherent_state(rot, g);
  EXPECT_GE(std::abs(v.vector.dot(ut)), 1.0 - 1e-4);
}

TEST(TwoPath, ElementarySymbols) {
  const GridSpec g = build_grid(1, 256, 24.0);
  const PhasePoint c = phase_point_1d(0.6, 0.0);

  const SymbolGrid one = make_symbol_1d(g, "1", [](double, double) { return 1.0; });
  const auto r1 = gaussian_symbol_average(one, c);
  EXPECT_NEAR(r1.quadrature, 1.0, 1e-9);
  EXPECT_NEAR(r1.matrix, 1.0, 1e-9);

  const SymbolGrid xs = make_symbol_1d(g, "x", [](double x, double) { return x; });
  const auto rx = gaussian_symbol_average(xs, c);
  EXPECT_NEAR(rx.matrix, 0.6, 1e-8);
  EXPECT_LE(rx.rel_gap, 1e-6);

  // Gaussian average of (x0 + d)^2 with d ~ exp(-d^2): x0^2 + 1/2.
  const SymbolGrid x2 = make_symbol_1d(g, "x^2", [](double x, double) { return x * x; });
  const auto rxx = gaussian_symbol_average(x2, c);
  EXPECT_NEAR(rxx.matrix, 0.36 + 0.5, 1e-6);
  EXPECT_LE(rxx.rel_gap, 1e-6);
}

TEST(TwoPath, RandomLocalizedSymbols) {
  const GridSpec g = build_grid(1, 256, 24.0);
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const double x0 = rng.uniform(-3.0, 3.0), k0 = rng.uniform(-2.0, 2.0);
    const double w = rng.uniform(0.7, 1.5), amp = rng.uniform(-2.0, 2.0);
    const SymbolGrid a = make_symbol_1d(g, "bump", [=](double x, double k) {
      const double dx = (x - x0) / w, dk = (k - k0) / w;
      return amp * std::exp(-0.5 * (dx * dx + dk * dk));
    });
    const PhasePoint c = phase_point_1d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const auto rep = gaussian_symbol_average(a, c);
    EXPECT_LE(rep.rel_gap, 1e-6) << "trial " << trial;
  }
}

TEST(Probe, EquilibriumCenterOrbitIntegral) {
  // At the fixed point the orbit integral is exactly T R; the packet value S
  // must respect the sup certificate against the Gram top eigenvalue.
  const GridSpec g = build_grid(1, 256, 24.0);
  const OperatorMatrix P = build_hamiltonian(kHarmonic, g);
  const SpectralData sd = eigendecompose(P);
  const double T = 2.0 * M_PI, nu = 1.0, R = 2.0;
  const BandedGram bg = banded_gram(kHarmonic, g, sd, T, nu, R);
  const ProbeReport rep = probe_lower_bound(kHarmonic, g, sd, bg, phase_point_1d(0.0, 0.0));
  ASSERT_TRUE(rep.accepted) << rep.reason;
  EXPECT_NEAR(rep.A, T * R, 1e-9);
  EXPECT_GT(rep.S, 0.0);
  EXPECT_TRUE(rep.sup_certified);
  EXPECT_LE(rep.S, rep.Q0 + 1e-9);
  EXPECT_LE(rep.above_band, 1e-6);
}

TEST(Probe, RatioTightensWithScale) {
  // |S/A - 1| non-increasing across the R list at a fixed moderate center:
  // the packet sees an ever-flatter weight as R grows.
  const GridSpec g = build_grid(1, 256, 24.0);
  const OperatorMatrix P = build_hamiltonian(kHarmonic, g);
  const SpectralData sd = eigendecompose(P);
  const double T = 2.0 * M_PI, nu = 1.0;
  std::vector<BandedGram> grams;
  for (double R : {1.0, 2.0, 4.0}) grams.push_back(banded_gram(kHarmonic, g, sd, T, nu, R));
  const auto rows = probe_lower_bounds(kHarmonic, g, sd, grams, phase_point_1d(0.6, 0.0));
  ASSERT_EQ(rows.size(), 3u);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    ASSERT_TRUE(r.accepted) << r.reason;
    const double dev = std::abs(r.ratio_S_A - 1.0);
    EXPECT_LE(dev, prev + 1e-12) << "R=" << r.R;
    prev = dev;
    EXPECT_TRUE(r.sup_certified);
    // The smeared classical average sits near the packet value.
    EXPECT_NEAR(r.ratio_Abar_A, r.ratio_S_A, 0.05) << "R=" << r.R;
  }
}

TEST(Probe, OrbitLeavingTheBoxIsRejected) {
  const GridSpec g = build_grid(1, 128, 12.0);
  const OperatorMatrix P = build_hamiltonian(kHarmonic, g);
  const SpectralData sd = eigendecompose(P);
  const BandedGram bg = banded_gram(kHarmonic, g, sd, 2.0 * M_PI, 1.0, 1.0);
  const ProbeReport rep = probe_lower_bound(kHarmonic, g, sd, bg, phase_point_1d(10.0, 0.0));
  EXPECT_FALSE(rep.accepted);
  EXPECT_FALSE(rep.reason.empty());
}

TEST(Probe, MismatchedGramParametersRejected) {
  const GridSpec g = build_grid(1, 128, 12.0);
  const OperatorMatrix P = build_hamiltonian(kHarmonic, g);
  const SpectralData sd = eigendecompose(P);
  BandedGram b1 = banded_gram(kHarmonic, g, sd, 2.0 * M_PI, 1.0, 1.0);
  BandedGram b2 = banded_gram(kHarmonic, g, sd, 1.0, 1.0, 2.0);
  EXPECT_THROW(probe_lower_bounds(kHarmonic, g, sd, {b1, b2}, phase_point_1d(0.5, 0.0)),
               ConfigError);
}
