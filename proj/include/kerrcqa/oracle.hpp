#pragma once

// Brute-force reference: sparse Lindblad superoperator on a truncated Fock space.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef KERRCQA_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "common.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "model.hpp"
#include "phase_space.hpp"

namespace kerrcqa::oracle {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

// UMFPACK is several times faster on Liouvillians; Eigen's LU is the fallback
#ifdef KERRCQA_HAVE_UMFPACK
using SparseLUSolver = Eigen::UmfPackLU<SpMat>;
#else
using SparseLUSolver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;
#endif

inline SpMat sp_identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

inline SpMat sp_annihilation(int n) {
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

inline SpMat kron(const SpMat& A, const SpMat& B) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros()) * B.nonZeros());
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
          t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
  SpMat out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// Column-major vectorization: rho(i, j) sits at i + dim * j.
struct Liouvillian {
  SpMat L;
  int dim = 0;
  double scale = 1.0;  // largest entry magnitude
  double rate = 1.0;   // largest of |K~| and the loss rates
};

inline SpMat hamiltonian(const PhysicalParams& p, int dim) {
  const SpMat a = sp_annihilation(dim);
  const SpMat ad = SpMat(a.adjoint());
  const SpMat ad2 = ad * ad, a2 = a * a;
  SpMat H = (0.5 * p.K) * (ad2 * a2) - p.Delta * (ad * a);
  H += p.Lambda1 * ad + std::conj(p.Lambda1) * a;
  H += (0.5 * p.Lambda2) * ad2 + (0.5 * std::conj(p.Lambda2)) * a2;
  H += p.Lambda3 * (ad2 * a) + std::conj(p.Lambda3) * (ad * a2);
  return H;
}

inline Liouvillian build_liouvillian(const PhysicalParams& p, int cutoff) {
  validate(p);
  if (p.kappa1 < 0.0 || p.kappa2 < 0.0)
    throw Error(ErrorKind::NegativeLoss, "negative loss has no Lindblad form");
  if (cutoff < 2) throw Error(ErrorKind::InvalidConfig, "oracle cutoff must be at least 2");
  const int n = cutoff + 1;
  const SpMat Id = sp_identity(n);
  const SpMat H = hamiltonian(p, n);
  auto spre = [&](const SpMat& A) { return kron(Id, A); };
  auto spost = [&](const SpMat& A) { return kron(SpMat(A.transpose()), Id); };
  auto dissipator = [&](const SpMat& c) {
    const SpMat cdc = SpMat(c.adjoint()) * c;
    return SpMat(kron(SpMat(c.conjugate()), c) - 0.5 * spre(cdc) - 0.5 * spost(cdc));
  };
  Liouvillian out;
  out.dim = n;
  out.L = -I * (spre(H) - spost(H));
  const SpMat a = sp_annihilation(n);
  if (p.kappa1 != 0.0) out.L += p.kappa1 * dissipator(a);
  if (p.kappa2 != 0.0) out.L += p.kappa2 * dissipator(SpMat(a * a));
  out.L.makeCompressed();
  double s = 0.0;
  for (int k = 0; k < out.L.outerSize(); ++k)
    for (SpMat::InnerIterator it(out.L, k); it; ++it) s = std::max(s, std::abs(it.value()));
  out.scale = std::max(s, 1e-300);
  out.rate = std::max({std::abs(p.tildeK()), p.kappa1, p.kappa2, 1e-300});
  return out;
}

enum class Sector { All, Even, Odd };

namespace detail {

inline std::vector<int> sector_indices(int dim, Sector s) {
  std::vector<int> idx;
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      if (s == Sector::Even && (i % 2 || j % 2)) continue;
      if (s == Sector::Odd && (i % 2 == 0 || j % 2 == 0)) continue;
      idx.push_back(i + dim * j);
    }
  return idx;
}

inline SpMat restrict(const SpMat& L, const std::vector<int>& idx) {
  std::vector<int> map(L.rows(), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) map[idx[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) t.emplace_back(map[it.row()], map[it.col()], it.value());
  SpMat out(idx.size(), idx.size());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// Replace row r by the trace functional and solve for the unit-trace kernel vector.
inline bool bordered_solve(const SpMat& L, const std::vector<int>& diag_pos, int r, CVector& x) {
  const int n = static_cast<int>(L.rows());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(L.nonZeros() + diag_pos.size());
  for (int k = 0; k < L.outerSize(); ++k)
    for (SpMat::InnerIterator it(L, k); it; ++it)
      if (it.row() != r) t.emplace_back(it.row(), it.col(), it.value());
  for (int d : diag_pos) t.emplace_back(r, d, 1.0);
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  SparseLUSolver lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) return false;
  CVector b = CVector::Zero(n);
  b(r) = 1.0;
  x = lu.solve(b);
  return lu.info() == Eigen::Success && x.allFinite();
}

}  // namespace detail

struct SteadyStateOptions {
  Sector sector = Sector::All;
  double residual_tol = 1e-10;  // relative to the largest Liouvillian entry
};

inline TruncatedDensityMatrix steady_state(const Liouvillian& lv, const SteadyStateOptions& opt = {}) {
  const int n = lv.dim;
  const std::vector<int> idx = detail::sector_indices(n, opt.sector);
  const SpMat L = opt.sector == Sector::All ? lv.L : detail::restrict(lv.L, idx);
  std::vector<int> diag_pos;  // positions of rho(i, i) within the (restricted) vector
  {
    std::vector<int> map(static_cast<std::size_t>(n) * n, -1);
    for (std::size_t k = 0; k < idx.size(); ++k) map[idx[k]] = static_cast<int>(k);
    for (int i = 0; i < n; ++i)
      if (map[i + n * i] >= 0) diag_pos.push_back(map[i + n * i]);
  }
  if (diag_pos.size() < 2) throw Error(ErrorKind::InvalidConfig, "sector too small");
  CVector x1, x2;
  const bool ok1 = detail::bordered_solve(L, diag_pos, diag_pos[0], x1);
  const bool ok2 = detail::bordered_solve(L, diag_pos, diag_pos[1], x2);
  if (!ok1 || !ok2) throw Error(ErrorKind::DegenerateKernel, "bordered Liouvillian is singular");
  if ((x1 - x2).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(ErrorKind::DegenerateKernel, "steady state is not unique");
  const double res = (L * x1).cwiseAbs().maxCoeff();
  if (res > opt.residual_tol * std::max(1.0, lv.scale))
    throw Error(ErrorKind::DegenerateKernel, "steady-state residual too large");
  TruncatedDensityMatrix out;
  out.rho = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < idx.size(); ++k) out.rho(idx[k] % n, idx[k] / n) = x1(k);
  out.rho = 0.5 * (out.rho + out.rho.adjoint());
  out.trace_deviation = 1.0 - out.trace();
  return out;
}

/// Grows the cutoff until the top five levels hold at most `top_tol` population.
inline TruncatedDensityMatrix steady_state_adaptive(const PhysicalParams& p, int start_cutoff, int max_cutoff = 240,
                                                    double top_tol = 1e-8,
                                                    const SteadyStateOptions& opt = {}) {
  int c = std::max(start_cutoff, 8);
  for (;;) {
    TruncatedDensityMatrix r = steady_state(build_liouvillian(p, c), opt);
    if (r.top_population(5) <= top_tol) return r;
    if (c >= max_cutoff) throw Error(ErrorKind::TruncationLoss, "oracle population reaches the cutoff");
    c = std::min(max_cutoff, c + std::max(10, c / 2));
  }
}

struct SpectrumResult {
  std::vector<cplx> eigenvalues;  // nonzero modes, slowest first
  std::vector<double> rates;      // -Re(lambda)
  std::vector<CMatrix> modes;     // HS-normalized eigenmatrices
  cplx zero_mode{};
  CMatrix slow_mode;
};

/// Liouvillian gap by shift-invert Arnoldi with locking.
inline SpectrumResult spectrum(const Liouvillian& lv, int k, double shift = -1.0) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "k must be positive");
  const int n = static_cast<int>(lv.L.rows());
  const int nev = std::min(2 * k + 1, n - 2);
  if (shift < 0) shift = 1e-12 * lv.rate;
  SpMat A = lv.L - shift * sp_identity(n);
  A.makeCompressed();
  SparseLUSolver lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::ConvergenceFailure, "shifted Liouvillian is singular");
  auto op = [&](const CVector& x) { return CVector(lu.solve(x)); };

  CMatrix Q(n, 0);
  const int m = std::min(std::max(2 * nev + 10, 30), n - 1);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(1.0 / (1.0 + i % 7), 1e-3 * (i % 11));
  const double tol = 1e-11;
  int rounds = 0;
  while (Q.cols() < nev) {
    if (++rounds > 60 * nev) throw Error(ErrorKind::ConvergenceFailure, "Arnoldi did not converge");
    if (Q.cols() > 0) {
      v -= Q * (Q.adjoint() * v);
      v -= Q * (Q.adjoint() * v);
    }
    CMatrix V = CMatrix::Zero(n, m + 1);
    CMatrix H = CMatrix::Zero(m + 1, m);
    V.col(0) = v / v.norm();
    int steps = m;
    for (int j = 0; j < m; ++j) {
      CVector w = op(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        if (Q.cols() > 0) w -= Q * (Q.adjoint() * w);
        CVector h = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta <= 1e-14 * H.col(j).norm()) {
        steps = j + 1;
        break;
      }
      V.col(j + 1) = w / beta;
    }
    Eigen::ComplexEigenSolver<CMatrix> es(H.topLeftCorner(steps, steps));
    std::vector<int> order(steps);
    for (int i = 0; i < steps; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    const double hlast = steps < m + 1 ? std::abs(H(steps, steps - 1)) : 0.0;
    int locked = 0;
    int need = nev - static_cast<int>(Q.cols());
    for (int t = 0; t < std::min(need, steps); ++t) {
      const int i = order[t];
      const cplx theta = es.eigenvalues()(i);
      CVector y = es.eigenvectors().col(i);
      y /= y.norm();
      const double res = hlast * std::abs(y(steps - 1));
      if (res > tol * std::abs(theta)) break;
      CVector x = V.leftCols(steps) * y;
      for (int pass = 0; pass < 2; ++pass)
        if (Q.cols() > 0) x -= Q * (Q.adjoint() * x);
      const double xn = x.norm();
      if (xn < 1e-8) continue;
      Q.conservativeResize(n, Q.cols() + 1);
      Q.col(Q.cols() - 1) = x / xn;
      ++locked;
    }
    if (Q.cols() >= nev) break;
    // restart from the leading unconverged Ritz vector combination
    CVector y = CVector::Zero(steps);
    for (int t = 0; t < std::min(nev, steps); ++t) y += es.eigenvectors().col(order[t]);
    v = V.leftCols(steps) * y;
    if (v.norm() < 1e-12) v = V.col(0);
    (void)locked;
  }
  // Rayleigh-Ritz on the locked invariant subspace
  CMatrix OQ(n, Q.cols());
  for (int j = 0; j < Q.cols(); ++j) OQ.col(j) = op(Q.col(j));
  CMatrix G = Q.adjoint() * OQ;
  Eigen::ComplexEigenSolver<CMatrix> es(G);
  struct Mode {
    cplx lambda;
    CVector vec;
    double trace_weight;
  };
  std::vector<Mode> modes;
  const int dim = lv.dim;
  for (int j = 0; j < G.rows(); ++j) {
    const cplx mu = es.eigenvalues()(j);
    CVector x = Q * es.eigenvectors().col(j);
    x /= x.norm();
    cplx tr = 0.0;
    for (int i = 0; i < dim; ++i) tr += x(i + dim * i);
    modes.push_back({shift + 1.0 / mu, x, std::abs(tr)});
  }
  auto zero = std::max_element(modes.begin(), modes.end(),
                               [](const Mode& a, const Mode& b) { return a.trace_weight < b.trace_weight; });
  SpectrumResult out;
  out.zero_mode = zero->lambda;
  modes.erase(zero);
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  for (int j = 0; j < k && j < static_cast<int>(modes.size()); ++j) {
    // polish with a few inverse iterations shifted next to the Ritz value
    {
      const cplx sigma = modes[j].lambda + 1e-9 * std::max(1.0, std::abs(modes[j].lambda));
      SpMat B = lv.L - sigma * sp_identity(n);
      B.makeCompressed();
      SparseLUSolver lu2;
      lu2.compute(B);
      if (lu2.info() == Eigen::Success) {
        CVector x = modes[j].vec;
        for (int it = 0; it < 3; ++it) {
          CVector y = lu2.solve(x);
          if (!y.allFinite() || y.norm() == 0.0) break;
          x = y / y.norm();
        }
        modes[j].vec = x;
        modes[j].lambda = x.dot(lv.L * x);
      }
    }
    out.eigenvalues.push_back(modes[j].lambda);
    out.rates.push_back(-modes[j].lambda.real());
    CMatrix M(dim, dim);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) M(r, c) = modes[j].vec(r + dim * c);
    out.modes.push_back(M / M.norm());
  }
  if (!out.modes.empty()) out.slow_mode = out.modes.front();
  return out;
}

struct Projection {
  double P = 0.0;
  int rank = 0;
  bool rank_deficient = false;
};

/// P = sum_i |<Mt_i, M_slow>|^2 over a Gram-Schmidt orthonormalized basis.
inline Projection slow_mode_projection(const CMatrix& slow, const std::vector<CMatrix>& basis) {
  Projection out;
  std::vector<CMatrix> ortho;
  const CMatrix s = slow / slow.norm();
  for (const auto& b : basis) {
    CMatrix r = b;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : ortho) r -= (q.adjoint() * r).trace() * q;
    const double nr = r.norm();
    if (nr < 1e-10) {
      out.rank_deficient = true;
      continue;
    }
    ortho.push_back(r / nr);
  }
  out.rank = static_cast<int>(ortho.size());
  for (const auto& q : ortho) out.P += std::norm((q.adjoint() * s).trace());
  return out;
}

struct FixedPoint {
  cplx alpha;
  bool stable = false;
  cplx eig1, eig2;
};

namespace detail {

inline Eigen::Matrix2d drift_jacobian(const PhysicalParams& p, cplx a) {
  const cplx ac = std::conj(a);
  const double n = std::norm(a);
  const cplx fa = -I * (2.0 * p.K * n - p.Delta + 2.0 * p.Lambda3 * ac + 2.0 * std::conj(p.Lambda3) * a) -
                  0.5 * p.kappa1 - 2.0 * p.kappa2 * n;
  const cplx fb = -I * (p.K * a * a + p.Lambda2 + 2.0 * p.Lambda3 * a) - p.kappa2 * a * a;
  const cplx fx = fa + fb, fy = I * (fa - fb);
  Eigen::Matrix2d J;
  J << fx.real(), fy.real(), fx.imag(), fy.imag();
  return J;
}

}  // namespace detail

/// Zeros of the mean-field drift, found by Newton from a 9 x 9 seed grid.
inline std::vector<FixedPoint> semiclassical_fixed_points(const PhysicalParams& p) {
  validate(p);
  const double k = std::max(std::abs(p.tildeK()), 1e-12);
  const double R = 2.0 * (std::sqrt((std::abs(p.Lambda2) + std::abs(p.Delta)) / k) + std::cbrt(std::abs(p.Lambda1) / k) +
                          std::abs(p.Lambda3) / k + 1.0);
  const double fscale = std::max({1.0, std::abs(p.Lambda1), std::abs(p.Lambda2), std::abs(p.Lambda3), std::abs(p.Delta)});
  std::vector<FixedPoint> out;
  for (int iy = 0; iy < 9; ++iy)
    for (int ix = 0; ix < 9; ++ix) {
      cplx a(-R + 2.0 * R * ix / 8.0, -R + 2.0 * R * iy / 8.0);
      bool conv = false;
      for (int it = 0; it < 200; ++it) {
        const cplx f = mean_field_drift(p, a);
        if (std::abs(f) < 1e-13 * fscale) {
          conv = true;
          break;
        }
        Eigen::Matrix2d J = detail::drift_jacobian(p, a);
        if (std::abs(J.determinant()) < 1e-300) break;
        Eigen::Vector2d step = J.fullPivLu().solve(Eigen::Vector2d(-f.real(), -f.imag()));
        double t = 1.0;
        cplx next = a + t * cplx(step(0), step(1));
        while (t > 1e-6 && std::abs(mean_field_drift(p, next)) > std::abs(f)) {
          t *= 0.5;
          next = a + t * cplx(step(0), step(1));
        }
        a = next;
      }
      if (!conv || std::abs(mean_field_drift(p, a)) > 1e-10 * fscale) continue;
      bool dup = false;
      for (const auto& q : out) dup = dup || std::abs(q.alpha - a) < 1e-8 * std::max(1.0, std::abs(a));
      if (dup) continue;
      FixedPoint fp;
      fp.alpha = a;
      Eigen::EigenSolver<Eigen::Matrix2d> es(detail::drift_jacobian(p, a));
      fp.eig1 = es.eigenvalues()(0);
      fp.eig2 = es.eigenvalues()(1);
      fp.stable = fp.eig1.real() < 0.0 && fp.eig2.real() < 0.0;
      out.push_back(fp);
    }
  std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.alpha.real() != b.alpha.real()) return a.alpha.real() < b.alpha.real();
    return a.alpha.imag() < b.alpha.imag();
  });
  return out;
}

/// Classical energy H(a -> z, a^dag -> z*).
inline double metapotential_value(const PhysicalParams& p, cplx z) {
  const cplx zc = std::conj(z);
  const double n = std::norm(z);
  return 0.5 * p.K * n * n - p.Delta * n +
         2.0 * std::real(p.Lambda1 * zc + 0.5 * p.Lambda2 * zc * zc + p.Lambda3 * zc * zc * z);
}

inline PhaseGrid metapotential(const PhysicalParams& p, const GridSpec& g) {
  g.check();
  PhaseGrid out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = metapotential_value(p, g.z(i, j));
  return out;
}

}  // namespace kerrcqa::oracle
