#pragma once

// Husimi Q and Wigner functions on rectangular grids.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "cqa.hpp"
#include "errors.hpp"
#include "fock.hpp"

namespace kerrcqa {

struct GridSpec {
  double x_min = -3, x_max = 3, y_min = -3, y_max = 3;
  int nx = 61, ny = 61;

  void check() const {
    if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidConfig, "grid needs at least 2 points per axis");
    if (!(x_max > x_min) || !(y_max > y_min)) throw Error(ErrorKind::InvalidConfig, "grid bounds are empty");
  }
  double x(int i) const { return x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return y_min + (y_max - y_min) * j / (ny - 1); }
  cplx z(int i, int j) const { return {x(i), y(j)}; }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
  // row-major in y then x
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

template <class T>
struct Grid {
  GridSpec spec;
  std::vector<T> values;

  explicit Grid(const GridSpec& g = {}) : spec(g), values(static_cast<std::size_t>(g.nx) * g.ny) {}
  T& at(int i, int j) { return values[spec.index(i, j)]; }
  const T& at(int i, int j) const { return values[spec.index(i, j)]; }
};

using PhaseGrid = Grid<double>;
using ComplexPhaseGrid = Grid<cplx>;

/// Trapezoid-rule integral over the grid.
template <class T>
T integrate(const Grid<T>& g) {
  T s{};
  for (int j = 0; j < g.spec.ny; ++j)
    for (int i = 0; i < g.spec.nx; ++i) {
      double w = (i == 0 || i == g.spec.nx - 1 ? 0.5 : 1.0) * (j == 0 || j == g.spec.ny - 1 ? 0.5 : 1.0);
      s += w * g.at(i, j);
    }
  return s * (g.spec.dx() * g.spec.dy());
}

template <class T>
double grid_min(const Grid<T>& g) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : g.values) m = std::min(m, std::real(v));
  return m;
}

namespace detail {

// sum_l alpha_l w^l / sqrt(l!) times exp(-|w|^2 / 2)
inline cplx sb_scaled(const std::vector<cplx>& amp, cplx w) {
  cplx t = std::exp(-0.5 * std::norm(w));
  cplx s = amp[0] * t;
  for (std::size_t l = 1; l < amp.size(); ++l) {
    t *= w / std::sqrt(static_cast<double>(l));
    s += amp[l] * t;
  }
  return s;
}

}  // namespace detail

/// Husimi Q of the + mode, (1/pi) |psi(z*)|^2 exp(-|z|^2) / N, lab frame.
inline PhaseGrid q_function(const AmplitudeCache& c, const GridSpec& g) {
  g.check();
  PhaseGrid out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx w = std::conj(g.z(i, j) + c.displacement);
      out.at(i, j) = std::norm(detail::sb_scaled(c.amp, w)) / (pi * c.norm);
    }
  return out;
}

/// Wigner function of the physical cavity from the closed form (2/pi)|psi(sqrt2 z*)|^2 exp(-2|z|^2) / N.
inline PhaseGrid wigner_pure(const AmplitudeCache& c, const GridSpec& g) {
  g.check();
  PhaseGrid out(g);
  const cplx ap = c.displacement / sqrt2;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx w = sqrt2 * std::conj(g.z(i, j) + ap);
      out.at(i, j) = 2.0 / pi * std::norm(detail::sb_scaled(c.amp, w)) / c.norm;
    }
  return out;
}

/// Cross Wigner function of tr_b[|psi1><psi2|]; both states share the displacement of c1.
inline ComplexPhaseGrid wigner_mode_pair(const AmplitudeCache& c1, const AmplitudeCache& c2, const GridSpec& g) {
  g.check();
  ComplexPhaseGrid out(g);
  const cplx ap = c1.displacement / sqrt2;
  const double nn = std::sqrt(c1.norm * c2.norm);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const cplx w = sqrt2 * std::conj(g.z(i, j) + ap);
      out.at(i, j) = 2.0 / pi * detail::sb_scaled(c1.amp, w) * std::conj(detail::sb_scaled(c2.amp, w)) / nn;
    }
  return out;
}

/// W(z) = (2/pi) Tr[D(z) P D(z)^dag rho] through the Laguerre recursion.
inline ComplexPhaseGrid wigner_numeric_complex(const CMatrix& rho, const GridSpec& g) {
  g.check();
  const int M = static_cast<int>(rho.rows());
  ComplexPhaseGrid out(g);
  std::vector<cplx> wl(M);
  for (int jy = 0; jy < g.ny; ++jy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx A = g.z(ix, jy);
      wl[0] = std::exp(-2.0 * std::norm(A)) / pi;
      cplx W = rho(0, 0) * wl[0];
      for (int n = 1; n < M; ++n) {
        wl[n] = 2.0 * A * wl[n - 1] / std::sqrt(static_cast<double>(n));
        W += rho(0, n) * wl[n] + rho(n, 0) * std::conj(wl[n]);
      }
      for (int m = 1; m < M; ++m) {
        cplx temp = wl[m];
        const double sm = std::sqrt(static_cast<double>(m));
        wl[m] = (2.0 * std::conj(A) * temp - sm * wl[m - 1]) / sm;
        W += rho(m, m) * wl[m];
        for (int n = m + 1; n < M; ++n) {
          cplx t2 = (2.0 * A * wl[n - 1] - sm * temp) / std::sqrt(static_cast<double>(n));
          temp = wl[n];
          wl[n] = t2;
          W += rho(m, n) * wl[n] + rho(n, m) * std::conj(wl[n]);
        }
      }
      out.at(ix, jy) = 2.0 * W;
    }
  return out;
}

inline PhaseGrid wigner_numeric(const TruncatedDensityMatrix& rho, const GridSpec& g) {
  if (rho.top_population(1) > 1e-8)
    throw Error(ErrorKind::TruncationLoss, "boundary Fock population exceeds 1e-8");
  ComplexPhaseGrid c = wigner_numeric_complex(rho.rho, g);
  PhaseGrid out(g);
  for (std::size_t k = 0; k < c.values.size(); ++k) out.values[k] = c.values[k].real();
  return out;
}

namespace detail {

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_grid_header(std::ostream& os, const GridSpec& g, const std::vector<std::string>& comments) {
  os << "# " << fmt17(g.x_min) << ' ' << fmt17(g.x_max) << ' ' << fmt17(g.y_min) << ' ' << fmt17(g.y_max) << ' '
     << g.nx << ' ' << g.ny << '\n';
  for (const auto& c : comments) os << "# " << c << '\n';
}

}  // namespace detail

inline void write_grid(std::ostream& os, const PhaseGrid& g, const std::vector<std::string>& comments = {}) {
  detail::write_grid_header(os, g.spec, comments);
  for (int j = 0; j < g.spec.ny; ++j)
    for (int i = 0; i < g.spec.nx; ++i)
      os << detail::fmt17(g.spec.x(i)) << ' ' << detail::fmt17(g.spec.y(j)) << ' ' << detail::fmt17(g.at(i, j)) << '\n';
}

inline void write_grid(std::ostream& os, const ComplexPhaseGrid& g, const std::vector<std::string>& comments = {}) {
  detail::write_grid_header(os, g.spec, comments);
  for (int j = 0; j < g.spec.ny; ++j)
    for (int i = 0; i < g.spec.nx; ++i)
      os << detail::fmt17(g.spec.x(i)) << ' ' << detail::fmt17(g.spec.y(j)) << ' ' << detail::fmt17(g.at(i, j).real())
         << ' ' << detail::fmt17(g.at(i, j).imag()) << '\n';
}

/// Reads either grid flavour; complex values are returned with zero imaginary part for real files.
inline ComplexPhaseGrid read_grid(std::istream& is, bool* is_complex = nullptr) {
  std::string line;
  if (!std::getline(is, line) || line.size() < 2 || line[0] != '#')
    throw Error(ErrorKind::InvalidConfig, "grid file lacks its header line");
  GridSpec g;
  {
    std::istringstream hs(line.substr(1));
    if (!(hs >> g.x_min >> g.x_max >> g.y_min >> g.y_max >> g.nx >> g.ny))
      throw Error(ErrorKind::InvalidConfig, "malformed grid header");
  }
  g.check();
  ComplexPhaseGrid out(g);
  std::size_t k = 0;
  bool cplx_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y, re, im = 0.0;
    if (!(ls >> x >> y >> re)) throw Error(ErrorKind::InvalidConfig, "malformed grid row");
    if (ls >> im) cplx_seen = true;
    if (k >= out.values.size()) throw Error(ErrorKind::InvalidConfig, "grid has too many rows");
    out.values[k++] = {re, im};
  }
  if (k != out.values.size()) throw Error(ErrorKind::InvalidConfig, "grid has too few rows");
  if (is_complex) *is_complex = cplx_seen;
  return out;
}

}  // namespace kerrcqa
