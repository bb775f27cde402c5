#pragma once

// Truncated Fock-space helpers shared by the solvers.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "common.hpp"
#include "errors.hpp"

namespace kerrcqa {

struct TruncatedDensityMatrix {
  CMatrix rho;
  double trace_deviation = 0.0;  // 1 - trace before renormalization

  int cutoff() const { return static_cast<int>(rho.rows()) - 1; }
  double trace() const { return rho.trace().real(); }
  double mean_n() const {
    double s = 0.0;
    for (int k = 0; k < rho.rows(); ++k) s += k * rho(k, k).real();
    return s;
  }
  std::vector<double> populations() const {
    std::vector<double> p(rho.rows());
    for (int k = 0; k < rho.rows(); ++k) p[k] = rho(k, k).real();
    return p;
  }
  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double top_population(int levels) const {
    double s = 0.0;
    for (int k = std::max<int>(0, rho.rows() - levels); k < rho.rows(); ++k) s += rho(k, k).real();
    return s;
  }
};

inline CMatrix annihilation(int dim) {
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// exp(beta a^dag - beta* a) on a dim-level space, through the Hermitian generator.
inline CMatrix displacement_matrix(cplx beta, int dim) {
  const CMatrix a = annihilation(dim);
  CMatrix H = I * (beta * a.adjoint() - std::conj(beta) * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  CVector ph(dim);
  for (int k = 0; k < dim; ++k) ph(k) = std::exp(-I * es.eigenvalues()(k));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline int displacement_margin(cplx beta) { return static_cast<int>(std::ceil(4.0 * std::norm(beta) + 20.0)); }

/// D(beta) applied to a state vector; the result keeps out_dim levels.
inline CVector displace_vector(const CVector& v, cplx beta, int out_dim) {
  if (beta == cplx(0.0)) {
    CVector out = CVector::Zero(out_dim);
    const int n = std::min<int>(out_dim, v.size());
    out.head(n) = v.head(n);
    return out;
  }
  const int big = std::max<int>(out_dim, v.size()) + displacement_margin(beta);
  CVector w = CVector::Zero(big);
  w.head(v.size()) = v;
  CVector r = displacement_matrix(beta, big) * w;
  return r.head(out_dim);
}

/// D(beta) rho D(beta)^dag truncated to out_dim levels.
inline CMatrix displace_operator(const CMatrix& rho, cplx beta, int out_dim) {
  if (beta == cplx(0.0)) {
    CMatrix out = CMatrix::Zero(out_dim, out_dim);
    const int n = std::min<int>(out_dim, rho.rows());
    out.topLeftCorner(n, n) = rho.topLeftCorner(n, n);
    return out;
  }
  const int big = std::max<int>(out_dim, rho.rows()) + displacement_margin(beta);
  CMatrix R = CMatrix::Zero(big, big);
  R.topLeftCorner(rho.rows(), rho.cols()) = rho;
  const CMatrix U = displacement_matrix(beta, big);
  CMatrix out = U * R * U.adjoint();
  return out.topLeftCorner(out_dim, out_dim);
}

inline CVector coherent_state(cplx alpha, int dim) {
  CVector v(dim);
  cplx t = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < dim; ++n) {
    if (n > 0) t *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = t;
  }
  return v;
}

inline CVector fock_state(int n, int dim) {
  CVector v = CVector::Zero(dim);
  if (n < dim) v(n) = 1.0;
  return v;
}

/// <phi|rho|phi> for a normalized pure state.
inline double fidelity_pure(const CMatrix& rho, const CVector& phi) {
  const int n = std::min<int>(rho.rows(), phi.size());
  CVector p = phi.head(n);
  return (p.adjoint() * rho.topLeftCorner(n, n) * p)(0, 0).real() / p.squaredNorm();
}

inline CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
inline double uhlmann_fidelity(const CMatrix& rho, const CMatrix& sigma) {
  const int n = std::min<int>(rho.rows(), sigma.rows());
  CMatrix s = psd_sqrt(rho.topLeftCorner(n, n));
  CMatrix inner = s * sigma.topLeftCorner(n, n) * s;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return t * t;
}

}  // namespace kerrcqa
