#pragma once

// Scans, blockade locations, metastability, parity fidelities, phase map.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cqa.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"

namespace kerrcqa::analysis {

enum class AxisName { Lambda1, Lambda2, Lambda3, Delta, kappa1 };

inline const char* axis_name(AxisName a) {
  switch (a) {
    case AxisName::Lambda1: return "Lambda1";
    case AxisName::Lambda2: return "Lambda2";
    case AxisName::Lambda3: return "Lambda3";
    case AxisName::Delta: return "Delta";
    case AxisName::kappa1: return "kappa1";
  }
  return "Lambda1";
}

inline AxisName parse_axis(const std::string& s) {
  if (s == "Lambda1") return AxisName::Lambda1;
  if (s == "Lambda2") return AxisName::Lambda2;
  if (s == "Lambda3") return AxisName::Lambda3;
  if (s == "Delta") return AxisName::Delta;
  if (s == "kappa1") return AxisName::kappa1;
  throw Error(ErrorKind::InvalidConfig, "unknown scan axis '" + s + "'");
}

/// Straight path from `from` to `to`; real axes use the real parts.
struct Axis {
  AxisName name = AxisName::Lambda1;
  cplx from{}, to{};

  bool is_complex() const {
    return name == AxisName::Lambda1 || name == AxisName::Lambda2 || name == AxisName::Lambda3;
  }
  cplx at(int i, int points) const { return points == 1 ? from : from + (to - from) * (static_cast<double>(i) / (points - 1)); }
  PhysicalParams apply(PhysicalParams p, cplx v) const {
    switch (name) {
      case AxisName::Lambda1: p.Lambda1 = v; break;
      case AxisName::Lambda2: p.Lambda2 = v; break;
      case AxisName::Lambda3: p.Lambda3 = v; break;
      case AxisName::Delta: p.Delta = v.real(); break;
      case AxisName::kappa1: p.kappa1 = v.real(); break;
    }
    return p;
  }
};

struct ScanOptions {
  bool oracle = false;
  int oracle_stride = 16;  // every n-th point when oracle runs
  int fock_levels = 0;     // number of Fock probabilities to report
  bool classical = true;
  int cutoff = -1;
  double tol = default_class_tol;
};

struct ScanRow {
  std::size_t index = 0;
  cplx value{};
  PhysicalParams params;
  cplx r1{}, r2{};
  std::string cls;
  double mean_n = std::nan("");
  std::optional<double> oracle_mean_n;
  std::vector<double> fock_probs;
  std::vector<double> branches;  // |alpha_j|^2 of stable mean-field points
  std::string error;

  bool ok() const { return error.empty(); }
};

inline ScanRow scan_point(const PhysicalParams& p, const ScanOptions& opt, bool run_oracle) {
  ScanRow row;
  row.params = p;
  try {
    if (std::abs(p.tildeK()) == 0.0) {
      SolveOptions so{opt.cutoff, opt.tol};
      SolveResult r = solve(p, so);
      row.cls = to_string(r.cls);
      row.r1 = r.d.r1;
      row.mean_n = r.mean_n;
      for (int k = 0; k < opt.fock_levels; ++k) row.fock_probs.push_back(k < r.rho.rho.rows() ? r.rho.rho(k, k).real() : 0.0);
    } else {
      DerivedParams d = derive(p);
      row.r1 = d.r1;
      row.r2 = d.r2;
      PhaseClass cls = classify(d, opt.tol);
      row.cls = to_string(cls);
      SolveResult r = solve(p, SolveOptions{opt.cutoff, opt.tol});
      row.mean_n = r.mean_n;
      for (int k = 0; k < opt.fock_levels; ++k) row.fock_probs.push_back(k < r.rho.rho.rows() ? r.rho.rho(k, k).real() : 0.0);
      if (run_oracle) {
        auto o = oracle::steady_state_adaptive(p, static_cast<int>(r.rho.rho.rows()) + 10, 240, 1e-10);
        row.oracle_mean_n = o.mean_n();
      }
    }
    if (opt.classical) {
      for (const auto& fp : oracle::semiclassical_fixed_points(p))
        if (fp.stable) row.branches.push_back(std::norm(fp.alpha));
    }
  } catch (const Error& e) {
    row.error = std::string(e.name()) + ": " + e.what();
  }
  return row;
}

struct ScanResult {
  Axis axis;
  std::vector<ScanRow> rows;
  std::size_t failures = 0;
};

/// Evaluates each point independently; `on_row` sees rows in axis order as they complete.
inline ScanResult scan(const PhysicalParams& p0, const Axis& axis, int points, const ScanOptions& opt = {},
                       const std::function<void(const ScanRow&)>& on_row = {}) {
  if (points < 1) throw Error(ErrorKind::InvalidConfig, "points must be positive");
  if (opt.oracle_stride < 1) throw Error(ErrorKind::InvalidConfig, "oracle_stride must be positive");
  ScanResult out;
  out.axis = axis;
  out.rows.resize(points);
  ordered_parallel<ScanRow>(
      points,
      [&](std::size_t i) {
        const cplx v = axis.at(static_cast<int>(i), points);
        ScanRow r = scan_point(axis.apply(p0, v), opt, opt.oracle && i % opt.oracle_stride == 0);
        r.index = i;
        r.value = v;
        return r;
      },
      [&](std::size_t i, ScanRow& r) {
        if (!r.ok()) ++out.failures;
        if (on_row) on_row(r);
        out.rows[i] = std::move(r);
      });
  return out;
}

/// Full width of the dip around row `imin` where mean_n stays below twice its minimum.
inline double dip_width(const ScanResult& s, std::size_t imin) {
  const double thr = 2.0 * s.rows[imin].mean_n;
  auto pos = [&](std::size_t i) { return s.rows[i].value; };
  auto cross = [&](std::size_t a, std::size_t b) {
    const double fa = s.rows[a].mean_n - thr, fb = s.rows[b].mean_n - thr;
    const double t = fa / (fa - fb);
    return pos(a) + t * (pos(b) - pos(a));
  };
  std::size_t lo = imin, hi = imin;
  while (lo > 0 && s.rows[lo - 1].mean_n < thr) --lo;
  while (hi + 1 < s.rows.size() && s.rows[hi + 1].mean_n < thr) ++hi;
  if (lo == 0 || hi + 1 == s.rows.size()) throw Error(ErrorKind::InvalidConfig, "dip is not contained in the scan");
  return std::abs(cross(hi, hi + 1) - cross(lo - 1, lo));
}

struct BlockadePoint {
  int n = 0;
  cplx Lambda1{};
  double residual = 0.0;  // |r1 - n| after re-deriving
};

/// Lambda1 values with r1 = n, from the affine dependence of r1 on Lambda1.
inline std::vector<BlockadePoint> locate_blockade_points(const PhysicalParams& p0, int n_max) {
  if (p0.Lambda2 == cplx(0.0) && p0.Lambda3 == cplx(0.0))
    throw Error(ErrorKind::InvalidConfig, "blockade lattice needs Lambda2 or Lambda3");
  if (n_max < 0) throw Error(ErrorKind::InvalidConfig, "n_max must be nonnegative");
  PhysicalParams base = p0;
  base.Lambda1 = 0.0;
  const DerivedParams d0 = derive(base);
  const cplx s = d0.eps_plus - d0.eps_minus;
  if (std::abs(s) == 0.0) throw Error(ErrorKind::DegenerateGauge, "gauge roots coincide");
  const cplx slope = 2.0 * sqrt2 / (d0.tildeK * s);  // d r1 / d Lambda1
  std::vector<BlockadePoint> out;
  for (int n = 0; n <= n_max; ++n) {
    BlockadePoint b;
    b.n = n;
    b.Lambda1 = (static_cast<double>(n) - d0.r1) / slope;
    PhysicalParams p = p0;
    p.Lambda1 = b.Lambda1;
    b.residual = std::abs(derive(p).r1 - static_cast<double>(n));
    out.push_back(b);
  }
  return out;
}

/// Physical-cavity operator tr_b[|a><b|] for two + mode states, lab frame, dim levels.
inline CMatrix mode_operator(const DarkState& a, const DarkState& b, int dim) {
  const AmplitudeCache ca = psi_amplitudes(a), cb = psi_amplitudes(b);
  const int L = std::max(ca.cutoff(), cb.cutoff()) + 1;
  auto bmat = [&](const DarkState& s) {
    auto amp = s.amplitudes(L);
    CMatrix B = CMatrix::Zero(L, L);
    for (int m = 0; m < L; ++m)
      for (int l = 0; m + l < L; ++l) B(m, l) = amp[m + l] * detail::bs_weight(m, l);
    return B;
  };
  double na = 0.0, nb = 0.0;
  for (auto x : a.amplitudes(L)) na += std::norm(x);
  for (auto x : b.amplitudes(L)) nb += std::norm(x);
  CMatrix M = bmat(a) * bmat(b).adjoint() / std::sqrt(na * nb);
  return displace_operator(M, -a.displacement() / sqrt2, dim);
}

struct MetastabilityRow {
  double kappa1 = 0.0;
  double gamma1 = std::nan(""), gamma2 = std::nan("");
  double one_minus_P_bistable = std::nan(""), one_minus_P_coherent = std::nan("");
  std::string cls;
  int basis_rank = 0;
  std::string error;

  double ratio() const { return gamma2 / gamma1; }
  double kappa_over_gamma() const { return kappa1 / gamma1; }
  bool ok() const { return error.empty(); }
};

/// Two-photon-driven recipe: Delta = n K / 2, Lambda1 = -i (n/2) sqrt(Lambda2 K), kappa1 swept.
inline PhysicalParams metastability_params(const PhysicalParams& p0, int n, double kappa1) {
  PhysicalParams p = p0;
  p.Delta = 0.5 * n * p0.K;
  p.Lambda1 = -I * (0.5 * n) * std::sqrt(p0.Lambda2 * p0.K);
  p.kappa1 = kappa1;
  return p;
}

inline MetastabilityRow metastability_point(const PhysicalParams& p, int cutoff) {
  MetastabilityRow row;
  row.kappa1 = p.kappa1;
  try {
    const oracle::Liouvillian lv = oracle::build_liouvillian(p, cutoff);
    const oracle::SpectrumResult sp = oracle::spectrum(lv, 2);
    if (sp.rates.size() < 2) throw Error(ErrorKind::ConvergenceFailure, "fewer than two slow modes");
    row.gamma1 = sp.rates[0];
    row.gamma2 = sp.rates[1];
    const int dim = lv.dim;

    const DerivedParams d = derive(p);
    const int n1 = detail::integer_residual(d.r1).second, n2 = detail::integer_residual(d.r2).second;
    row.cls = "Bistable(" + std::to_string(n1) + "," + std::to_string(n2) + ")";
    auto [psi1, psi2] = bistable_pair(snap_to_integer_point(d, n1, n2), n1, n2);
    const std::vector<const DarkState*> pair{&psi1, &psi2};
    std::vector<CMatrix> bist;
    for (auto* x : pair)
      for (auto* y : pair) bist.push_back(mode_operator(*x, *y, dim));
    auto pb = oracle::slow_mode_projection(sp.slow_mode, bist);
    row.basis_rank = pb.rank;
    row.one_minus_P_bistable = 1.0 - pb.P;

    std::vector<CVector> coh;
    for (const auto& fp : oracle::semiclassical_fixed_points(p))
      if (fp.stable) coh.push_back(coherent_state(fp.alpha, dim));
    std::vector<CMatrix> cb;
    for (const auto& x : coh)
      for (const auto& y : coh) cb.push_back(x * y.adjoint());
    row.one_minus_P_coherent = 1.0 - oracle::slow_mode_projection(sp.slow_mode, cb).P;
  } catch (const Error& e) {
    row.error = std::string(e.name()) + ": " + e.what();
  }
  return row;
}

inline std::vector<MetastabilityRow> metastability_report(const PhysicalParams& p0, int n,
                                                          const std::vector<double>& kappa1_values, int cutoff = 60,
                                                          const std::function<void(const MetastabilityRow&)>& on_row = {}) {
  if (n < 0) throw Error(ErrorKind::InvalidConfig, "n must be nonnegative");
  if (p0.Lambda2 == cplx(0.0)) throw Error(ErrorKind::InvalidConfig, "recipe needs a two-photon drive");
  std::vector<MetastabilityRow> rows(kappa1_values.size());
  ordered_parallel<MetastabilityRow>(
      kappa1_values.size(),
      [&](std::size_t i) { return metastability_point(metastability_params(p0, n, kappa1_values[i]), cutoff); },
      [&](std::size_t i, MetastabilityRow& r) {
        if (on_row) on_row(r);
        rows[i] = r;
      });
  return rows;
}

struct ParityRow {
  double Delta = 0.0;
  double N = std::nan(""), N_sum = std::nan("");
  double F_even_cat = std::nan(""), F_even_vacuum = std::nan("");
  double F_odd_cat = std::nan(""), F_odd_one = std::nan("");
  double uhlmann_even_cat = std::nan("");
  double parity_even = std::nan(""), parity_odd = std::nan("");
  std::string error;

  bool ok() const { return error.empty(); }
};

inline double parity_expectation(const CMatrix& rho) {
  double s = 0.0;
  for (int m = 0; m < rho.rows(); ++m) s += (m % 2 ? -1.0 : 1.0) * rho(m, m).real();
  return s;
}

inline ParityRow parity_point(const PhysicalParams& p) {
  ParityRow row;
  row.Delta = p.Delta;
  try {
    const ParityResult r = parity_solve(p);
    row.N = r.N;
    row.N_sum = r.N_sum;
    const int dim = static_cast<int>(r.rho_e.rho.rows());
    const cplx lambda2 = 2.0 * p.Lambda2 / p.tildeK();
    const cplx a = I * std::sqrt(0.5 * lambda2);
    CVector even = coherent_state(a, dim) + coherent_state(-a, dim);
    CVector odd = coherent_state(a, dim) - coherent_state(-a, dim);
    even.normalize();
    odd.normalize();
    row.F_even_cat = fidelity_pure(r.rho_e.rho, even);
    row.F_even_vacuum = fidelity_pure(r.rho_e.rho, fock_state(0, dim));
    row.F_odd_cat = fidelity_pure(r.rho_o.rho, odd);
    row.F_odd_one = fidelity_pure(r.rho_o.rho, fock_state(1, dim));
    row.uhlmann_even_cat = uhlmann_fidelity(r.rho_e.rho, even * even.adjoint());
    row.parity_even = parity_expectation(r.rho_e.rho);
    row.parity_odd = parity_expectation(r.rho_o.rho);
  } catch (const Error& e) {
    row.error = std::string(e.name()) + ": " + e.what();
  }
  return row;
}

inline std::vector<ParityRow> parity_report(const PhysicalParams& p0, const std::vector<double>& deltas,
                                            const std::function<void(const ParityRow&)>& on_row = {}) {
  if (!detail::is_parity_regime(p0))
    throw Error(ErrorKind::WrongRegime, "parity regime needs kappa1 = Lambda1 = Lambda3 = 0 and kappa2 > 0");
  std::vector<ParityRow> rows(deltas.size());
  ordered_parallel<ParityRow>(
      deltas.size(),
      [&](std::size_t i) {
        PhysicalParams p = p0;
        p.Delta = deltas[i];
        return parity_point(p);
      },
      [&](std::size_t i, ParityRow& r) {
        if (on_row) on_row(r);
        rows[i] = r;
      });
  return rows;
}

struct PhaseCell {
  double r1_target = 0.0, r2_target = 0.0;
  double Delta = std::nan("");
  cplx Lambda1{};
  cplx r1{}, r2{};
  std::string cls;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Inverts (r1, r2) targets to (Lambda1, Delta) with the other parameters fixed, then classifies.
inline PhaseCell phase_cell(const PhysicalParams& p0, double r1t, double r2t, double tol) {
  PhaseCell c;
  c.r1_target = r1t;
  c.r2_target = r2t;
  try {
    const cplx Kt = p0.tildeK();
    if (std::abs(Kt) == 0.0) throw Error(ErrorKind::InversionFailure, "K~ = 0");
    const cplx dt = r2t * Kt / 2.0 - 2.0 * std::norm(p0.Lambda3) / Kt;
    PhysicalParams p = p0;
    p.Delta = dt.real();
    p.Lambda1 = 0.0;
    const DerivedParams d0 = derive(p);
    const cplx s = d0.eps_plus - d0.eps_minus;
    if (std::abs(s) == 0.0 || !d0.r1_defined)
      throw Error(ErrorKind::InversionFailure, "r1 does not depend on Lambda1 here");
    p.Lambda1 = (r1t - d0.r1) * Kt * s / (2.0 * sqrt2);
    const DerivedParams d = derive(p);
    c.Delta = p.Delta;
    c.Lambda1 = p.Lambda1;
    c.r1 = d.r1;
    c.r2 = d.r2;
    c.cls = to_string(classify(d, tol));
  } catch (const Error& e) {
    c.error = std::string(e.name()) + ": " + e.what();
  }
  return c;
}

inline std::vector<PhaseCell> phase_diagram(const PhysicalParams& p0, std::pair<double, double> r1_range,
                                            std::pair<double, double> r2_range, int n1, int n2,
                                            double tol = default_class_tol,
                                            const std::function<void(const PhaseCell&)>& on_cell = {}) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::InvalidConfig, "resolution must be positive");
  auto lin = [](std::pair<double, double> r, int n, int i) {
    return n == 1 ? r.first : r.first + (r.second - r.first) * i / (n - 1);
  };
  const std::size_t total = static_cast<std::size_t>(n1) * n2;
  std::vector<PhaseCell> cells(total);
  // row-major in r2 then r1
  ordered_parallel<PhaseCell>(
      total,
      [&](std::size_t k) {
        const int i = static_cast<int>(k % n1), j = static_cast<int>(k / n1);
        return phase_cell(p0, lin(r1_range, n1, i), lin(r2_range, n2, j), tol);
      },
      [&](std::size_t k, PhaseCell& c) {
        if (on_cell) on_cell(c);
        cells[k] = c;
      });
  return cells;
}

}  // namespace kerrcqa::analysis
