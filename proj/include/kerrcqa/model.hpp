#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include "common.hpp"
#include "errors.hpp"

namespace kerrcqa {

/// Driven-dissipative Kerr resonator. Rates in units where K is typically 1.
struct PhysicalParams {
  double K = 1.0;
  double Delta = 0.0;
  cplx Lambda1{};
  cplx Lambda2{};
  cplx Lambda3{};
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  bool allow_negative_loss = false;

  cplx tildeK() const { return {K, -kappa2}; }
  cplx tildeDelta() const { return {Delta, 0.5 * kappa1}; }
};

struct DerivedParams {
  PhysicalParams params;
  cplx tildeK, tildeDelta;
  cplx D;
  cplx lambda1, lambda2, lambda3;
  cplx eps_plus, eps_minus;
  cplx alpha_plus;
  cplx r1, r2;
  bool r1_defined = true;  // false when eps_plus = eps_minus = 0 (Bessel case)
};

enum class PhaseKind { Generic, PureCoherent, Blockade, AntiBlockade, Bistable, MediumWindow };

struct PhaseClass {
  PhaseKind kind = PhaseKind::Generic;
  int n1 = -1;  // integer value of r1 when it is one
  int n2 = -1;  // integer value of r2 when it is one
  double res_r1 = 0.0;
  double res_r2 = 0.0;

  bool operator==(const PhaseClass& o) const { return kind == o.kind && n1 == o.n1 && n2 == o.n2; }
};

inline constexpr double default_class_tol = 1e-9;

inline std::string to_string(const PhaseClass& c) {
  switch (c.kind) {
    case PhaseKind::Generic: return "Generic";
    case PhaseKind::PureCoherent: return "PureCoherent";
    case PhaseKind::Blockade: return "Blockade(" + std::to_string(c.n1) + ")";
    case PhaseKind::AntiBlockade: return "AntiBlockade(" + std::to_string(c.n2) + ")";
    case PhaseKind::Bistable:
      return "Bistable(" + std::to_string(c.n1) + "," + std::to_string(c.n2) + ")";
    case PhaseKind::MediumWindow:
      return "MediumWindow(" + std::to_string(c.n2) + "," + std::to_string(c.n1) + ")";
  }
  return "Generic";
}

namespace detail {

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// distance of z to the nearest nonnegative integer, and that integer
inline std::pair<double, int> integer_residual(cplx z) {
  if (!finite(z)) return {std::numeric_limits<double>::infinity(), -1};
  double n = std::max(0.0, std::round(z.real()));
  return {std::abs(z - cplx(n, 0.0)), static_cast<int>(n)};
}

}  // namespace detail

/// Order n0 of the Kerr-free blockade (K~ = 0, Lambda2 = 0, Lambda1 = -n0 Lambda3), if present.
inline std::optional<int> kerr_free_blockade_order(const PhysicalParams& p) {
  if (std::abs(p.tildeK()) != 0.0 || std::abs(p.Lambda3) == 0.0 || std::abs(p.Lambda2) != 0.0)
    return std::nullopt;
  auto [res, n] = detail::integer_residual(-p.Lambda1 / p.Lambda3);
  if (res < default_class_tol) return n;
  return std::nullopt;
}

inline void validate(const PhysicalParams& p) {
  auto ok = [](double x) { return std::isfinite(x); };
  if (!ok(p.K) || !ok(p.Delta) || !ok(p.kappa1) || !ok(p.kappa2) || !detail::finite(p.Lambda1) ||
      !detail::finite(p.Lambda2) || !detail::finite(p.Lambda3))
    throw Error(ErrorKind::InvalidConfig, "parameters must be finite");
  if (!p.allow_negative_loss && (p.kappa1 < 0.0 || p.kappa2 < 0.0))
    throw Error(ErrorKind::NegativeLoss, "kappa1 and kappa2 must be nonnegative");
  if (std::abs(p.tildeK()) == 0.0 && !kerr_free_blockade_order(p))
    throw Error(ErrorKind::DegenerateKerr, "K and kappa2 both vanish");
}

/// Coherent amplitude of the + mode in the displaced frame.
inline cplx alpha_plus(const PhysicalParams& p) {
  return sqrt2 * p.Lambda3 / std::conj(p.tildeK());
}

inline DerivedParams derive(const PhysicalParams& p) {
  validate(p);
  const cplx Kt = p.tildeK(), Dt = p.tildeDelta();
  if (std::abs(Kt) == 0.0) throw Error(ErrorKind::DegenerateKerr, "K~ = 0 has no displaced-frame form");
  const cplx Kc = std::conj(Kt);
  const double absK2 = std::norm(Kt);
  const cplx L1 = p.Lambda1, L2 = p.Lambda2, L3 = p.Lambda3;

  DerivedParams d;
  d.params = p;
  d.tildeK = Kt;
  d.tildeDelta = Dt;

  if (L3 == cplx(0.0)) {
    d.D = 2.0 * Dt / Kt;
    d.lambda1 = 2.0 * sqrt2 * L1 / Kt;
    d.lambda2 = 2.0 * L2 / Kt;
    d.lambda3 = 0.0;
    d.alpha_plus = 0.0;
    d.eps_plus = I * std::sqrt(d.lambda2);
    d.eps_minus = -d.eps_plus;
    d.r2 = d.D;
    if (L1 == cplx(0.0)) {
      d.r1 = 0.5 * d.D;
    } else if (d.eps_plus == cplx(0.0)) {
      d.r1_defined = false;
      d.r1 = cplx(std::numeric_limits<double>::infinity(), 0.0);
    } else {
      d.r1 = 0.5 * d.D + d.lambda1 / (2.0 * d.eps_plus);
    }
    return d;
  }

  const cplx A3 = std::norm(L3);
  d.D = (2.0 / Kt) * (Dt + 2.0 * A3 / Kt);
  d.lambda1 = (sqrt2 * L3 / absK2) * (4.0 * A3 / Kt + 2.0 * Dt) + (2.0 * sqrt2 / Kt) * (L1 - L2 * std::conj(L3) / Kt);
  d.lambda3 = 2.0 * sqrt2 * L3 / Kt * (1.0 - Kt / Kc);
  d.lambda2 = (2.0 * L3 * L3 / absK2) * (Kt / Kc - 2.0) + 2.0 * L2 / Kt;
  d.alpha_plus = sqrt2 * L3 / Kc;
  d.r2 = d.D;

  // roots of eps^2 - lambda3 eps + lambda2 = 0
  const cplx disc = std::sqrt(d.lambda3 * d.lambda3 - 4.0 * d.lambda2);
  const cplx ra = 0.5 * (d.lambda3 + disc), rb = 0.5 * (d.lambda3 - disc);
  // eps_plus is the root continuing from i sqrt(lambda2) (Lambda3 -> 0) and -alpha_plus (Lambda2 -> 0)
  const cplx ref = -d.alpha_plus + I * std::sqrt(2.0 * L2 / Kt);
  const double da = std::abs(ra - ref), db = std::abs(rb - ref);
  const double scale = std::max({1.0, std::abs(ra), std::abs(rb)});
  bool pick_a;
  if (std::abs(da - db) <= 1e-12 * scale)
    pick_a = ra.imag() != rb.imag() ? ra.imag() > rb.imag() : ra.real() >= rb.real();
  else
    pick_a = da < db;
  d.eps_plus = pick_a ? ra : rb;
  d.eps_minus = pick_a ? rb : ra;

  const cplx s = d.eps_plus - d.eps_minus;
  const cplx num = d.lambda1 + d.eps_plus * d.D;
  if (std::abs(s) <= 1e-12 * scale) {
    if (std::abs(d.eps_plus) <= 1e-12 * scale) {
      if (std::abs(d.lambda1) <= 1e-14 * scale) {
        d.r1 = 0.5 * d.D;
      } else {
        d.r1_defined = false;
        d.r1 = cplx(std::numeric_limits<double>::infinity(), 0.0);
      }
      return d;
    }
    if (std::abs(num) > 1e-12 * std::max(1.0, std::abs(d.lambda1)))
      throw Error(ErrorKind::DegenerateGauge, "gauge roots coincide; r1 is undefined");
    d.r1 = 0.5 * d.D;
    return d;
  }
  d.r1 = num / s;
  return d;
}

inline PhaseClass classify(const DerivedParams& d, double tol = default_class_tol) {
  if (!(tol > 0.0) || tol >= 0.5) throw Error(ErrorKind::InvalidConfig, "tolerance must lie in (0, 0.5)");
  PhaseClass c;
  auto [res1, n1] = detail::integer_residual(d.r1);
  auto [res2, n2] = detail::integer_residual(d.r2);
  c.res_r1 = d.r1_defined ? res1 : std::numeric_limits<double>::infinity();
  c.res_r2 = res2;
  const bool i1 = d.r1_defined && res1 < tol;
  const bool i2 = res2 < tol;
  if (i1 && i2) {
    c.n1 = n1;
    c.n2 = n2;
    c.kind = n1 <= n2 ? PhaseKind::Bistable : PhaseKind::MediumWindow;
  } else if (i1) {
    c.kind = PhaseKind::Blockade;
    c.n1 = n1;
  } else if (i2) {
    c.kind = PhaseKind::AntiBlockade;
    c.n2 = n2;
  } else if (d.r1_defined && std::abs(d.r1 - d.r2) < tol) {
    c.kind = PhaseKind::PureCoherent;
  }
  return c;
}

/// Same parameters with r1 = n1 and r2 = n2 imposed exactly (lambda1 and D adjusted).
inline DerivedParams snap_to_integer_point(const DerivedParams& d, int n1, int n2) {
  DerivedParams s = d;
  s.D = static_cast<double>(n2);
  s.r2 = s.D;
  s.r1 = static_cast<double>(n1);
  s.r1_defined = true;
  s.lambda1 = s.r1 * (s.eps_plus - s.eps_minus) - s.eps_plus * s.D;
  return s;
}

/// Q = sqrt(K~ / (Lambda2/4)) i Lambda1 / (2 Delta + i kappa1), for Lambda3 = 0 near Bistable(0,0).
inline cplx q_parameter(const PhysicalParams& p) {
  if (std::abs(p.Lambda2) == 0.0) throw Error(ErrorKind::WrongRegime, "Q needs a two-photon drive");
  const cplx den(2.0 * p.Delta, p.kappa1);
  if (std::abs(den) == 0.0) throw Error(ErrorKind::WrongRegime, "Q needs 2 Delta + i kappa1 != 0");
  return std::sqrt(p.tildeK() / (p.Lambda2 / 4.0)) * (I * p.Lambda1) / den;
}

/// Mean-field drift f(alpha) = d alpha / dt.
inline cplx mean_field_drift(const PhysicalParams& p, cplx a) {
  const double n = std::norm(a);
  return -I * (p.K * n * a - p.Delta * a + p.Lambda1 + p.Lambda2 * std::conj(a) + 2.0 * p.Lambda3 * n +
               std::conj(p.Lambda3) * a * a) -
         0.5 * p.kappa1 * a - p.kappa2 * n * a;
}

}  // namespace kerrcqa
