#pragma once

// Coherent-quantum-absorber dark states: the + mode of the cascaded pair is
// pure, and the physical cavity follows by a beamsplitter trace.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "errors.hpp"
#include "fock.hpp"
#include "hyperfun.hpp"
#include "model.hpp"

namespace kerrcqa {

enum class DarkForm {
  Kummer,
  Bessel,
  Hypergeometric,
  TruncatedBlockade,
  AntiBlockadeShifted,
  MediumWindow,
  BistableBranch,
  Superposition,
  Parity,
  KerrFreeBlockade
};

inline const char* form_name(DarkForm f) {
  switch (f) {
    case DarkForm::Kummer: return "Kummer";
    case DarkForm::Bessel: return "Bessel";
    case DarkForm::Hypergeometric: return "Hypergeometric";
    case DarkForm::TruncatedBlockade: return "TruncatedBlockade";
    case DarkForm::AntiBlockadeShifted: return "AntiBlockadeShifted";
    case DarkForm::MediumWindow: return "MediumWindow";
    case DarkForm::BistableBranch: return "BistableBranch";
    case DarkForm::Superposition: return "Superposition";
    case DarkForm::Parity: return "Parity";
    case DarkForm::KerrFreeBlockade: return "KerrFreeBlockade";
  }
  return "Kummer";
}

/// One additive piece of a dark state's displaced-frame Fock amplitudes.
struct Component {
  enum class Kind { Recursion, FiniteCore, Explicit };
  Kind kind = Kind::Recursion;
  cplx weight{1.0};
  int start = 0;      // Recursion: first nonzero index
  cplx seed{1.0};     // Recursion: amplitude at start
  std::vector<cplx> core;  // FiniteCore: c_m
  std::vector<cplx> amps;  // Explicit
};

struct DarkState {
  DerivedParams d;  // constants driving the recursion (possibly snapped to an integer point)
  DarkForm form = DarkForm::Kummer;
  int n_lo = -1, n_hi = -1;
  std::vector<cplx> core;  // c_m when the core is finite
  std::vector<Component> parts;
  bool lab_frame = false;  // amplitudes already refer to the undisplaced + mode

  cplx displacement() const { return lab_frame ? cplx(0.0) : d.alpha_plus; }
  cplx gauge() const { return d.eps_plus; }

  int suggested_length() const {
    double e = std::max(std::norm(d.eps_plus), std::norm(d.eps_minus));
    int n = static_cast<int>(std::ceil(8.0 * e + 40.0));
    for (const auto& c : parts) {
      n = std::max<int>(n, c.start + 40);
      n = std::max<int>(n, static_cast<int>(c.core.size()) + 40);
      n = std::max<int>(n, static_cast<int>(c.amps.size()));
    }
    return std::max(n, 80);
  }

  /// Unnormalized displaced-frame amplitudes alpha_l = psi_l / sqrt(l!), l < len.
  std::vector<cplx> amplitudes(int len) const {
    std::vector<cplx> out(len, cplx(0.0));
    for (const auto& c : parts) {
      std::vector<cplx> a(len, cplx(0.0));
      switch (c.kind) {
        case Component::Kind::Recursion: {
          if (c.start >= len) break;
          a[c.start] = c.seed;
          for (int l = c.start; l + 1 < len; ++l) {
            const double dl = l;
            cplx num = (d.lambda1 + d.lambda3 * dl) * a[l];
            if (l > 0) num += d.lambda2 * std::sqrt(dl) * a[l - 1];
            const cplx gap = dl - d.D;
            if (std::abs(gap) < 1e-12 * std::max(1.0, dl))
              a[l + 1] = 0.0;  // 0/0 step: take the branch without c_{l+1}
            else
              a[l + 1] = -num / (gap * std::sqrt(dl + 1.0));
          }
          break;
        }
        case Component::Kind::FiniteCore: {
          const cplx s = d.eps_plus - d.eps_minus, e = d.eps_plus;
          cplx sk_over = 1.0;  // s^k / sqrt(k!)
          for (int k = 0; k < static_cast<int>(c.core.size()) && k < len; ++k) {
            if (k > 0) sk_over *= s / std::sqrt(static_cast<double>(k));
            if (c.core[k] == cplx(0.0)) continue;
            cplx A = sk_over * c.core[k];
            a[k] += A;
            for (int l = k; l + 1 < len; ++l) {
              A *= -e * std::sqrt(l + 1.0) / static_cast<double>(l + 1 - k);
              a[l + 1] += A;
            }
          }
          break;
        }
        case Component::Kind::Explicit:
          for (int l = 0; l < len && l < static_cast<int>(c.amps.size()); ++l) a[l] = c.amps[l];
          break;
      }
      for (int l = 0; l < len; ++l) out[l] += c.weight * a[l];
    }
    return out;
  }
};

namespace detail {

inline DarkState recursion_state(const DerivedParams& d, DarkForm f, int start, cplx seed) {
  DarkState s;
  s.d = d;
  s.form = f;
  Component c;
  c.kind = Component::Kind::Recursion;
  c.start = start;
  c.seed = seed;
  s.parts.push_back(c);
  return s;
}

inline DarkState core_state(const DerivedParams& d, DarkForm f, std::vector<cplx> core) {
  DarkState s;
  s.d = d;
  s.form = f;
  s.core = core;
  Component c;
  c.kind = Component::Kind::FiniteCore;
  c.core = std::move(core);
  s.parts.push_back(c);
  return s;
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

inline cplx tail_seed(const DerivedParams& d, int m0, cplx c_first) {
  // Taylor coefficient at m0+1 of exp(-eps z) sum_{m > m0} c_m (s z)^m / m!
  const cplx s = d.eps_plus - d.eps_minus;
  return c_first * std::exp(static_cast<double>(m0 + 1) * std::log(s) - 0.5 * log_factorial(m0 + 1));
}

inline bool is_parity_regime(const PhysicalParams& p) {
  return p.kappa1 == 0.0 && p.Lambda1 == cplx(0.0) && p.Lambda3 == cplx(0.0) && p.kappa2 > 0.0;
}

}  // namespace detail

/// Coefficients c_0..c_cutoff of the gauge-transformed state.
inline std::vector<cplx> core_coefficients(const DerivedParams& d, int cutoff, double tol = default_class_tol) {
  if (cutoff < 0) throw Error(ErrorKind::InvalidConfig, "cutoff must be nonnegative");
  if (!d.r1_defined) throw Error(ErrorKind::DegenerateGauge, "r1 is undefined");
  const PhaseClass cls = classify(d, tol);
  std::vector<cplx> c(cutoff + 1, cplx(0.0));
  auto step = [&](int m) { return (static_cast<double>(m) - d.r1) / (static_cast<double>(m) - d.r2); };
  switch (cls.kind) {
    case PhaseKind::Bistable:
      throw Error(ErrorKind::NoSolution, "bistable point: the dark manifold is two-dimensional");
    case PhaseKind::Blockade:
      c[0] = 1.0;
      for (int m = 0; m < cls.n1 && m < cutoff; ++m) c[m + 1] = step(m) * c[m];
      break;
    case PhaseKind::AntiBlockade:
      if (cls.n2 + 1 <= cutoff) c[cls.n2 + 1] = 1.0;
      for (int m = cls.n2 + 1; m < cutoff; ++m) c[m + 1] = step(m) * c[m];
      break;
    case PhaseKind::MediumWindow:
      if (cls.n2 + 1 <= cutoff) c[cls.n2 + 1] = 1.0;
      for (int m = cls.n2 + 1; m < cls.n1 && m < cutoff; ++m) c[m + 1] = step(m) * c[m];
      break;
    default:
      c[0] = 1.0;
      for (int m = 0; m < cutoff; ++m) c[m + 1] = step(m) * c[m];
  }
  return c;
}

/// The unique dark state for every class except Bistable.
inline DarkState solve_dark_state(const DerivedParams& d, const PhaseClass& cls) {
  switch (cls.kind) {
    case PhaseKind::Bistable:
      throw Error(ErrorKind::NoSolution, "bistable point: use bistable_pair");
    case PhaseKind::Blockade: {
      std::vector<cplx> core(cls.n1 + 1, cplx(0.0));
      core[0] = 1.0;
      for (int m = 0; m < cls.n1; ++m)
        core[m + 1] = (static_cast<double>(m) - d.r1) / (static_cast<double>(m) - d.r2) * core[m];
      DarkState s = detail::core_state(d, DarkForm::TruncatedBlockade, core);
      s.n_lo = 0;
      s.n_hi = cls.n1;
      return s;
    }
    case PhaseKind::AntiBlockade: {
      DarkState s = detail::recursion_state(d, DarkForm::AntiBlockadeShifted, cls.n2 + 1,
                                            detail::tail_seed(d, cls.n2, 1.0));
      s.n_lo = cls.n2 + 1;
      return s;
    }
    case PhaseKind::MediumWindow: {
      std::vector<cplx> core(cls.n1 + 1, cplx(0.0));
      core[cls.n2 + 1] = 1.0;
      for (int m = cls.n2 + 1; m < cls.n1; ++m)
        core[m + 1] = (static_cast<double>(m) - d.r1) / (static_cast<double>(m) - d.r2) * core[m];
      DarkState s = detail::core_state(d, DarkForm::MediumWindow, core);
      s.n_lo = cls.n2 + 1;
      s.n_hi = cls.n1;
      return s;
    }
    default:
      break;
  }
  const double scale = std::max(1.0, std::abs(d.tildeK));
  const bool no_l2 = std::abs(d.lambda2) <= 1e-15 * scale;
  const bool no_l3 = std::abs(d.lambda3) <= 1e-15 * scale;
  DarkForm f = DarkForm::Kummer;
  if (no_l2 && no_l3)
    f = DarkForm::Bessel;
  else if (no_l2)
    f = DarkForm::Hypergeometric;
  else if (detail::is_parity_regime(d.params))
    f = DarkForm::Parity;
  return detail::recursion_state(d, f, 0, 1.0);
}

/// Exact blockade at K~ = 0: Lambda2 = 0 and Lambda1 = -n0 Lambda3; no displaced frame exists.
inline DarkState kerr_free_blockade_state(const PhysicalParams& p) {
  auto n0 = kerr_free_blockade_order(p);
  if (!n0) throw Error(ErrorKind::WrongRegime, "needs K~ = 0, Lambda2 = 0 and Lambda1 = -n0 Lambda3");
  const int n = *n0;
  const cplx L3 = p.Lambda3, Dt = p.tildeDelta();
  // Taylor coefficients from the top: 2 sqrt2 L3 (l - n0) psi_l = 2 Dt psi_{l+1} - sqrt2 L3* psi_{l+2}
  std::vector<cplx> psi(n + 3, cplx(0.0));
  psi[n] = 1.0;
  for (int l = n - 1; l >= 0; --l)
    psi[l] = (2.0 * Dt * psi[l + 1] - sqrt2 * std::conj(L3) * psi[l + 2]) / (2.0 * sqrt2 * L3 * static_cast<double>(l - n));
  DarkState s;
  s.d.params = p;
  s.d.tildeK = p.tildeK();
  s.d.tildeDelta = Dt;
  s.d.r1 = static_cast<double>(n);
  s.d.r2 = std::numeric_limits<double>::infinity();
  s.form = DarkForm::KerrFreeBlockade;
  s.lab_frame = true;
  s.n_lo = 0;
  s.n_hi = n;
  Component c;
  c.kind = Component::Kind::Explicit;
  for (int l = 0; l <= n; ++l) c.amps.push_back(psi[l] * std::exp(-0.5 * detail::log_factorial(l)));
  s.parts.push_back(c);
  return s;
}

/// Both branches at Bistable(n1, n2): blockade branch psi1 and tail psi2.
inline std::pair<DarkState, DarkState> bistable_pair(const DerivedParams& d, int n1, int n2,
                                                     double tol = default_class_tol) {
  const PhaseClass cls = classify(d, tol);
  if (cls.kind != PhaseKind::Bistable || cls.n1 != n1 || cls.n2 != n2)
    throw Error(ErrorKind::NotBistable, "parameters are not at Bistable(" + std::to_string(n1) + "," +
                                            std::to_string(n2) + "), got " + to_string(cls));
  const DerivedParams s = snap_to_integer_point(d, n1, n2);
  std::vector<cplx> core(n1 + 1, cplx(0.0));
  core[0] = 1.0;
  for (int m = 0; m < n1; ++m)
    core[m + 1] = static_cast<double>(m - n1) / static_cast<double>(m - n2) * core[m];
  DarkState psi1 = detail::core_state(s, DarkForm::BistableBranch, core);
  psi1.n_lo = 0;
  psi1.n_hi = n1;
  // c_{n2+1} continues from c_{n1} so that psi ~ psi1 + (dr1/dr2) psi2 nearby
  cplx lead = core[n1];
  if (n1 != n2) {
    lead = -lead;
    for (int m = n1 + 1; m < n2; ++m) lead *= static_cast<double>(m - n1) / static_cast<double>(m - n2);
  }
  DarkState psi2 = detail::recursion_state(s, DarkForm::BistableBranch, n2 + 1, detail::tail_seed(s, n2, lead));
  psi2.n_lo = n2 + 1;
  psi2.core.assign(n2 + 2, cplx(0.0));
  psi2.core[n2 + 1] = lead;
  return {psi1, psi2};
}

struct NearBistable {
  DarkState state;
  cplx ratio;  // dr1 / dr2
  std::optional<cplx> Q;
};

/// Leading-order state psi1 + (dr1/dr2) psi2 near Bistable(n1, n2).
inline NearBistable near_bistable_state(const DerivedParams& d, int n1, int n2) {
  if (!d.r1_defined) throw Error(ErrorKind::DegenerateGauge, "r1 is undefined");
  const cplx dr1 = d.r1 - static_cast<double>(n1), dr2 = d.r2 - static_cast<double>(n2);
  if (std::abs(dr1) >= 0.1 || std::abs(dr2) >= 0.1)
    throw Error(ErrorKind::NotNearBistable, "r1, r2 are not within 0.1 of the integer point");
  if (dr2 == cplx(0.0)) throw Error(ErrorKind::NotNearBistable, "dr2 = 0: use solve_dark_state");
  DerivedParams s = snap_to_integer_point(d, n1, n2);
  auto [p1, p2] = bistable_pair(s, n1, n2);
  NearBistable out;
  out.ratio = dr1 / dr2;
  out.state = p1;
  out.state.form = DarkForm::Superposition;
  out.state.n_lo = n1;
  out.state.n_hi = n2;
  for (auto c : p2.parts) {
    c.weight *= out.ratio;
    out.state.parts.push_back(c);
  }
  if (n1 == 0 && n2 == 0) out.Q = 1.0 - 2.0 * out.ratio;
  return out;
}

/// Amplitudes with the normalization N = sum |alpha_l|^2 (alpha_l = psi_l / sqrt(l!)).
struct AmplitudeCache {
  std::vector<cplx> amp;
  double norm = 0.0;
  double norm_sum = 0.0;
  std::optional<double> norm_closed;
  DarkForm form = DarkForm::Kummer;
  DerivedParams d;
  cplx displacement{};

  int cutoff() const { return static_cast<int>(amp.size()) - 1; }
  cplx psi(int l) const { return amp[l] * std::exp(0.5 * std::lgamma(l + 1.0)); }
  double tail_mass(int levels) const {
    double t = 0.0;
    for (int l = std::max(0, cutoff() + 1 - levels); l <= cutoff(); ++l) t += std::norm(amp[l]);
    return t;
  }
};

namespace detail {

inline std::optional<double> closed_form_norm(const DarkState& s) {
  using hyperfun::pfq;
  const DerivedParams& d = s.d;
  try {
    if (s.form == DarkForm::Hypergeometric) {
      const cplx r1 = -d.lambda1 / d.lambda3;
      cplx v = pfq<cplx>({-r1, -std::conj(r1)}, {-d.r2, -std::conj(d.r2)}, cplx(std::norm(d.lambda3)));
      return v.real();
    }
    if (s.form == DarkForm::Parity) {
      const cplx beta = 0.5 - 0.5 * d.D;
      cplx v = pfq<cplx>({cplx(0.5)}, {beta, std::conj(beta)}, cplx(std::norm(0.5 * d.lambda2)));
      return v.real();
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace detail

/// Fills amplitudes up to at least `cutoff` (auto when negative), extending until the tail is negligible.
inline AmplitudeCache psi_amplitudes(const DarkState& s, int cutoff = -1) {
  AmplitudeCache c;
  c.form = s.form;
  c.d = s.d;
  c.displacement = s.displacement();
  int len = std::max(cutoff + 1, s.suggested_length());
  const int max_len = 1 << 15;
  for (;;) {
    c.amp = s.amplitudes(len);
    double total = 0.0;
    for (const auto& a : c.amp) total += std::norm(a);
    if (!std::isfinite(total) || total == 0.0)
      throw Error(ErrorKind::NonConvergence, "dark-state amplitudes are not normalizable");
    c.norm_sum = total;
    if (c.tail_mass(5) <= 1e-15 * total) break;
    if (len >= max_len) throw Error(ErrorKind::NonConvergence, "normalization sum did not converge");
    len *= 2;
  }
  c.norm_closed = detail::closed_form_norm(s);
  c.norm = c.norm_closed ? *c.norm_closed : c.norm_sum;
  return c;
}

namespace detail {

// sqrt(C(m+l, l)) 2^{-(m+l)/2}
inline double bs_weight(int m, int l) {
  return std::exp(0.5 * (std::lgamma(m + l + 1.0) - std::lgamma(l + 1.0) - std::lgamma(m + 1.0)) -
                  0.5 * (m + l) * std::log(2.0));
}

inline cplx rho_element_sum(const AmplitudeCache& c, int m, int n) {
  cplx s = 0.0;
  for (int l = 0; std::max(m, n) + l <= c.cutoff(); ++l)
    s += c.amp[m + l] * std::conj(c.amp[n + l]) * bs_weight(m, l) * bs_weight(n, l);
  return s / c.norm;
}

inline std::optional<cplx> rho_element_closed(const AmplitudeCache& c, int m, int n) {
  using hyperfun::pfq;
  const DerivedParams& d = c.d;
  const double half = std::pow(2.0, -0.5 * (m + n));
  const double dm = m, dn = n;
  try {
    if (c.form == DarkForm::Hypergeometric) {
      const cplx r1 = -d.lambda1 / d.lambda3, r2 = d.r2;
      cplx f = pfq<cplx>({dm - r1, dn - std::conj(r1)}, {dm - r2, dn - std::conj(r2)},
                         cplx(0.5 * std::norm(d.lambda3)));
      return c.amp[m] * std::conj(c.amp[n]) * half * f / c.norm;
    }
    if (c.form == DarkForm::Parity) {
      if ((m + n) % 2 != 0 || m % 2 != n % 2) return cplx(0.0);
      const cplx Dv = d.D, Dc = std::conj(d.D);
      const cplx x = std::norm(0.25 * d.lambda2);
      if (m % 2 == 0) {
        cplx f = pfq<cplx>({0.5 * (dm + 1.0), 0.5 * (dn + 1.0)},
                           {0.5 * (dm - Dv + 1.0), 0.5 * (dn - Dc + 1.0), cplx(0.5)}, x);
        return c.amp[m] * std::conj(c.amp[n]) * half * f / c.norm;
      }
      cplx f = pfq<cplx>({0.5 * (dm + 2.0), 0.5 * (dn + 2.0)},
                         {0.5 * (dm - Dv + 2.0), 0.5 * (dn - Dc + 2.0), cplx(1.5)}, x);
      cplx pre = c.amp[m - 1] * std::conj(c.amp[n - 1]) * std::sqrt(dm * dn) * std::norm(d.lambda2) /
                 (2.0 * (dm - Dv) * (dn - Dc));
      return pre * half * f / c.norm;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PoleAtParameter) throw;
  }
  return std::nullopt;
}

}  // namespace detail

/// <m| rho' |n> in the displaced frame of the physical cavity.
inline cplx rho_element(const AmplitudeCache& c, int m, int n) {
  if (m < 0 || n < 0) throw Error(ErrorKind::InvalidConfig, "negative Fock index");
  if (std::max(m, n) > c.cutoff() - 5) throw Error(ErrorKind::CutoffTooSmall, "index too close to the amplitude cutoff");
  if (auto v = detail::rho_element_closed(c, m, n)) return *v;
  return detail::rho_element_sum(c, m, n);
}

/// Tr[rho' a^dag^n a^m] in the displaced frame.
inline cplx moment(const AmplitudeCache& c, int n, int m) {
  using hyperfun::pfq;
  if (m < 0 || n < 0) throw Error(ErrorKind::InvalidConfig, "negative moment order");
  if (std::max(m, n) > c.cutoff() - 5) throw Error(ErrorKind::CutoffTooSmall, "moment order too close to the cutoff");
  const double half = std::pow(2.0, -0.5 * (m + n));
  if (c.form == DarkForm::Hypergeometric) {
    try {
      const DerivedParams& d = c.d;
      const cplx r1 = -d.lambda1 / d.lambda3;
      cplx f = pfq<cplx>({static_cast<double>(m) - r1, static_cast<double>(n) - std::conj(r1)},
                         {static_cast<double>(m) - d.r2, static_cast<double>(n) - std::conj(d.r2)},
                         cplx(std::norm(d.lambda3)));
      return c.psi(m) * std::conj(c.psi(n)) * half * f / c.norm;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PoleAtParameter) throw;
    }
  }
  cplx s = 0.0;
  for (int l = 0; std::max(m, n) + l <= c.cutoff(); ++l) {
    const double w = std::exp(0.5 * (std::lgamma(m + l + 1.0) + std::lgamma(n + l + 1.0)) - std::lgamma(l + 1.0));
    s += c.amp[m + l] * std::conj(c.amp[n + l]) * w;
  }
  return half * s / c.norm;
}

/// Full displaced-frame density matrix, dim levels (auto when negative).
inline TruncatedDensityMatrix rho_displaced(const AmplitudeCache& c, int dim = -1) {
  const int L = c.cutoff() + 1;
  CMatrix B = CMatrix::Zero(L, L);
  for (int m = 0; m < L; ++m)
    for (int l = 0; m + l < L; ++l) B(m, l) = c.amp[m + l] * detail::bs_weight(m, l);
  if (dim <= 0) {
    std::vector<double> diag(L);
    for (int m = 0; m < L; ++m) diag[m] = B.row(m).squaredNorm() / c.norm_sum;
    double tail = 0.0;
    dim = L;
    for (int m = L - 1; m >= 0; --m) {
      tail += diag[m];
      if (tail > 1e-15) {
        dim = std::min(L, m + 3);
        break;
      }
    }
    dim = std::max(dim, 2);
  }
  dim = std::min(dim, L);
  TruncatedDensityMatrix r;
  r.rho = B.topRows(dim) * B.topRows(dim).adjoint() / c.norm_sum;
  r.trace_deviation = 1.0 - r.trace();
  return r;
}

/// D(-alpha') rho D(-alpha')^dag with alpha' = alpha / sqrt(2).
inline TruncatedDensityMatrix undisplace(const TruncatedDensityMatrix& rho, cplx alpha, int out_dim = -1) {
  const cplx ap = alpha / sqrt2;
  const bool fixed = out_dim > 0;
  if (!fixed)
    out_dim = static_cast<int>(rho.rho.rows()) + static_cast<int>(std::ceil(std::norm(ap) + 8.0 * std::abs(ap))) + 10;
  TruncatedDensityMatrix out;
  double tr = 0.0;
  for (;;) {
    out.rho = displace_operator(rho.rho, -ap, out_dim);
    tr = out.rho.trace().real();
    out.trace_deviation = 1.0 - tr / rho.trace();
    if (std::abs(out.trace_deviation) <= 1e-13) break;
    // a broad displaced-frame state needs more room than the estimate; grow unless the caller fixed it
    if (fixed || out_dim >= 4096) throw Error(ErrorKind::TruncationLoss, "undisplaced state exceeds the output cutoff");
    out_dim += std::max(20, out_dim / 4);
  }
  out.rho /= tr;
  return out;
}

struct ParityResult {
  DarkState state;
  AmplitudeCache cache;
  double N = 0.0;
  double N_sum = 0.0;
  TruncatedDensityMatrix rho_plus, rho_e, rho_o;
};

/// Parity-symmetric regime (kappa1 = Lambda1 = Lambda3 = 0, kappa2 > 0).
inline ParityResult parity_solve(const PhysicalParams& p, int dim = -1) {
  if (!detail::is_parity_regime(p))
    throw Error(ErrorKind::WrongRegime, "parity regime needs kappa1 = Lambda1 = Lambda3 = 0 and kappa2 > 0");
  ParityResult r;
  DerivedParams d = derive(p);
  r.state = detail::recursion_state(d, DarkForm::Parity, 0, 1.0);
  r.cache = psi_amplitudes(r.state);
  r.N = r.cache.norm;
  r.N_sum = r.cache.norm_sum;
  r.rho_plus = rho_displaced(r.cache, dim);
  const int M = static_cast<int>(r.rho_plus.rho.rows());
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n)
      if (auto v = detail::rho_element_closed(r.cache, m, n)) r.rho_plus.rho(m, n) = *v;
  r.rho_e.rho = CMatrix::Zero(M, M);
  r.rho_o.rho = CMatrix::Zero(M, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n) {
      if (m % 2 != n % 2) continue;
      (m % 2 == 0 ? r.rho_e.rho : r.rho_o.rho)(m, n) = r.rho_plus.rho(m, n);
    }
  const double te = r.rho_e.trace(), to = r.rho_o.trace();
  r.rho_e.trace_deviation = 1.0 - te / ((r.N + 1.0) / (2.0 * r.N));
  r.rho_o.trace_deviation = to > 0 ? 1.0 - to / ((r.N - 1.0) / (2.0 * r.N)) : 0.0;
  r.rho_e.rho /= te;
  if (to > 0) r.rho_o.rho /= to;
  return r;
}

struct SolveOptions {
  int cutoff = -1;  // displaced-frame amplitude cutoff, auto when negative
  double tol = default_class_tol;
};

struct SolveResult {
  DerivedParams d;
  PhaseClass cls;
  DarkState state;
  AmplitudeCache cache;
  TruncatedDensityMatrix rho;  // lab frame
  double mean_n = 0.0;         // lab frame, from moments
};

inline double lab_mean_n(const AmplitudeCache& c) {
  const cplx ap = c.displacement / sqrt2;
  const double n1 = moment(c, 1, 1).real();
  const cplx a1 = moment(c, 0, 1);
  return n1 - 2.0 * std::real(std::conj(ap) * a1) + std::norm(ap);
}

inline SolveResult solve_state(const DarkState& s, const DerivedParams& d, const PhaseClass& cls, int cutoff) {
  SolveResult r;
  r.d = d;
  r.cls = cls;
  r.state = s;
  r.cache = psi_amplitudes(s, cutoff);
  TruncatedDensityMatrix disp = rho_displaced(r.cache);
  r.rho = undisplace(disp, r.cache.displacement);
  r.mean_n = lab_mean_n(r.cache);
  return r;
}

/// Lab-frame steady state of the physical cavity.
inline SolveResult solve(const PhysicalParams& p, const SolveOptions& opt = {}) {
  validate(p);
  if (std::abs(p.tildeK()) == 0.0) {
    DarkState s = kerr_free_blockade_state(p);
    PhaseClass cls;
    cls.kind = PhaseKind::Blockade;
    cls.n1 = s.n_hi;
    return solve_state(s, s.d, cls, opt.cutoff);
  }
  DerivedParams d = derive(p);
  PhaseClass cls = classify(d, opt.tol);
  return solve_state(solve_dark_state(d, cls), d, cls, opt.cutoff);
}

/// ||P H+ psi|| / ||psi|| for the lab-frame + mode state, P projecting on `cutoff` + 1 levels.
/// Rows up to the cutoff are exact because H+ lowers by at most two levels; ||psi|| is the full norm.
inline double dark_state_residual(const DarkState& s, int cutoff = 150) {
  const PhysicalParams& p = s.d.params;
  const int len = cutoff + 1;
  const int dim = len + 3;
  auto a = s.amplitudes(dim + displacement_margin(s.displacement()) + 40);
  CVector xi(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) xi(l) = a[l];
  CVector v = CVector::Zero(dim);
  v.head(dim - 1) = displace_vector(xi, -s.displacement(), dim - 1);
  const CMatrix c = annihilation(dim);
  const CMatrix cd = c.adjoint();
  const cplx Kt = p.tildeK(), Dt = p.tildeDelta();
  CVector c1 = c * v, c2 = c * c1;
  CVector h = Kt * (cd * c2) + sqrt2 * std::conj(p.Lambda3) * c2 + 2.0 * sqrt2 * p.Lambda3 * (cd * c1) - 2.0 * Dt * c1 +
              2.0 * p.Lambda2 * (cd * v) + 2.0 * sqrt2 * p.Lambda1 * v;
  double full = 0.0;
  for (const auto& x : psi_amplitudes(s).amp) full += std::norm(x);
  return h.head(len).norm() / std::sqrt(full);
}

}  // namespace kerrcqa
