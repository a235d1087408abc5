#ifndef SMOOTHLAB_GRID_HPP
#define SMOOTHLAB_GRID_HPP

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>

#include "smoothlab/errors.hpp"

namespace smoothlab {

// Position box [-L, L]^d sampled at x_j = -L + j dx, dx = 2L/n, with the
// DFT-dual momentum grid xi_s = (s - n/2) pi/L (spacing pi/L, Nyquist
// Xi = pi/dx).  Symbols live on the doubled midpoint lattice
// y_m = -L + m dx/2, m = 0..2n-2, so every pair midpoint (x_j + x_k)/2 is a
// lattice node.
struct GridSpec {
  int d = 1;
  int n = 0;       // points per axis, power of two
  double L = 0.0;  // half-width

  double dx() const { return 2.0 * L / n; }
  double dxi() const { return M_PI / L; }
  double nyquist() const { return M_PI / dx(); }

  double xpos(int j) const { return -L + dx() * j; }
  double xi(int s) const { return (s - n / 2) * M_PI / L; }
  double midpoint(int m) const { return -L + 0.5 * dx() * m; }

  int points() const {  // n^d
    long long p = 1;
    for (int i = 0; i < d; ++i) p *= n;
    return static_cast<int>(p);
  }
  int midpoints_per_axis() const { return 2 * n - 1; }
  int midpoint_nodes() const {  // (2n-1)^d
    long long p = 1;
    for (int i = 0; i < d; ++i) p *= midpoints_per_axis();
    return static_cast<int>(p);
  }
};

inline bool is_power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

inline GridSpec build_grid(int d, int n, double L) {
  if (d != 1 && d != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (!is_power_of_two(n)) throw ConfigError("grid points per axis must be a power of two >= 2");
  if (!(L > 0.0)) throw ConfigError("grid half-width L must be > 0");
  if (d == 1 && n > 4096) throw ConfigError("dense algebra cap: n <= 4096 in d = 1");
  if (d == 2 && n > 64) throw ConfigError("dense algebra cap: n <= 64 per axis in d = 2");
  return GridSpec{d, n, L};
}

// Symbol samples a(y, xi) arranged midpoint-major: values(m, s) for d = 1;
// for d = 2 the row index flattens (m1, m2) and the column index (s1, s2).
struct SymbolGrid {
  GridSpec grid;
  Eigen::MatrixXcd values;
  std::string label;
  bool is_real = false;
};

struct OperatorMatrix {
  GridSpec grid;
  Eigen::MatrixXcd entries;  // n^d x n^d
  bool hermitian = false;
};

namespace detail {
inline void check_symbol_shape(const SymbolGrid& sym) {
  if (sym.values.rows() != sym.grid.midpoint_nodes() || sym.values.cols() != sym.grid.points())
    throw ConfigError("symbol array shape does not match its grid");
  if (!sym.values.allFinite()) throw NumericalError("symbol has non-finite entries");
}
}  // namespace detail

// Samples a callable a(x_vec, xi_vec) -> double on the midpoint x momentum
// lattice.  Positions/momenta are passed as Eigen vectors of length d.
inline SymbolGrid make_symbol(const GridSpec& g, const std::string& label,
                              const std::function<double(const Eigen::VectorXd&,
                                                         const Eigen::VectorXd&)>& f) {
  SymbolGrid sym;
  sym.grid = g;
  sym.label = label;
  sym.is_real = true;
  sym.values.resize(g.midpoint_nodes(), g.points());
  const int n = g.n, mids = g.midpoints_per_axis();
  Eigen::VectorXd xv(g.d), kv(g.d);
  if (g.d == 1) {
    for (int m = 0; m < mids; ++m) {
      xv[0] = g.midpoint(m);
      for (int s = 0; s < n; ++s) {
        kv[0] = g.xi(s);
        sym.values(m, s) = f(xv, kv);
      }
    }
  } else {
    for (int m1 = 0; m1 < mids; ++m1)
      for (int m2 = 0; m2 < mids; ++m2) {
        xv[0] = g.midpoint(m1);
        xv[1] = g.midpoint(m2);
        const int row = m1 * mids + m2;
        for (int s1 = 0; s1 < n; ++s1)
          for (int s2 = 0; s2 < n; ++s2) {
            kv[0] = g.xi(s1);
            kv[1] = g.xi(s2);
            sym.values(row, s1 * n + s2) = f(xv, kv);
          }
      }
  }
  detail::check_symbol_shape(sym);
  return sym;
}

// Scalar-argument convenience for d = 1 symbols.
inline SymbolGrid make_symbol_1d(const GridSpec& g, const std::string& label,
                                 const std::function<double(double, double)>& f) {
  if (g.d != 1) throw ConfigError("make_symbol_1d requires a d = 1 grid");
  return make_symbol(g, label, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& k) {
    return f(x[0], k[0]);
  });
}

// --- Flat binary persistence ---------------------------------------------------
//
// Layout: three little-endian 64-bit header words (int64 d, int64 n, the IEEE
// bits of double L), then the n^d x n^d entries row-major as (re, im) pairs of
// 64-bit floats.  Readable across runs on any little-endian host.
static_assert(std::endian::native == std::endian::little,
              "persisted matrices assume a little-endian host");

inline void save_operator(const std::string& path, const OperatorMatrix& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot open for writing: " + path);
  const int64_t d = op.grid.d, n = op.grid.n;
  const double L = op.grid.L;
  out.write(reinterpret_cast<const char*>(&d), 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&L), 8);
  const Eigen::Index N = op.entries.rows();
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      const double re = op.entries(i, j).real(), im = op.entries(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!out) throw RunError("write failed: " + path);
}

inline OperatorMatrix load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunError("cannot open for reading: " + path);
  int64_t d = 0, n = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&d), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&L), 8);
  if (!in) throw RunError("truncated header: " + path);
  OperatorMatrix op;
  op.grid = build_grid(static_cast<int>(d), static_cast<int>(n), L);
  const Eigen::Index N = op.grid.points();
  op.entries.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), 8);
      in.read(reinterpret_cast<char*>(&im), 8);
      op.entries(i, j) = {re, im};
    }
  if (!in) throw RunError("truncated payload: " + path);
  const double scale = op.entries.cwiseAbs().maxCoeff();
  op.hermitian =
      (op.entries - op.entries.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300);
  return op;
}

}  // namespace smoothlab

#endif
