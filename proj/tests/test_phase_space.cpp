#include <catch_amalgamated.hpp>

#include <sstream>

#include <kerrcqa/analysis.hpp>
#include <kerrcqa/phase_space.hpp>

using namespace kerrcqa;
using C = std::complex<double>;

namespace {

AmplitudeCache cache_for(const PhysicalParams& p) {
  const DerivedParams d = derive(p);
  return psi_amplitudes(solve_dark_state(d, classify(d)));
}

PhysicalParams generic_point() {
  PhysicalParams g;
  g.Delta = 0.7;
  g.Lambda1 = {0.8, -0.3};
  g.Lambda2 = {0.5, 0.2};
  g.Lambda3 = {0.3, 0.4};
  g.kappa1 = 0.4;
  g.kappa2 = 0.2;
  return g;
}

GridSpec square(double r, int n) {
  GridSpec g;
  g.x_min = g.y_min = -r;
  g.x_max = g.y_max = r;
  g.nx = g.ny = n;
  return g;
}

}  // namespace

TEST_CASE("vacuum phase-space functions") {
  PhysicalParams p;
  p.kappa1 = 1;
  const AmplitudeCache c = cache_for(p);
  const GridSpec g = square(3, 101);
  const PhaseGrid W = wigner_pure(c, g), Q = q_function(c, g);
  CHECK(W.at(50, 50) == Catch::Approx(2 / pi).epsilon(1e-14));
  CHECK(Q.at(50, 50) == Catch::Approx(1 / pi).epsilon(1e-14));
  CHECK(integrate(W) == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(integrate(Q) == Catch::Approx(1.0).epsilon(1e-3));

  TruncatedDensityMatrix vac;
  vac.rho = CMatrix::Zero(6, 6);
  vac.rho(0, 0) = 1.0;
  CHECK(wigner_numeric(vac, g).at(50, 50) == Catch::Approx(2 / pi).epsilon(1e-14));
  TruncatedDensityMatrix one = vac;
  one.rho(0, 0) = 0.0;
  one.rho(1, 1) = 1.0;
  CHECK(wigner_numeric(one, g).at(50, 50) == Catch::Approx(-2 / pi).epsilon(1e-14));
  TruncatedDensityMatrix edge = vac;
  edge.rho(0, 0) = 0.5;
  edge.rho(5, 5) = 0.5;
  CHECK_THROWS_AS(wigner_numeric(edge, g), Error);
}

TEST_CASE("Husimi function of a coherent branch peaks at its amplitude") {
  PhysicalParams p;
  p.Lambda2 = C(1.0, 0.5);
  p.kappa2 = 0.3;
  const DerivedParams d = derive(p);
  auto [psi1, psi2] = bistable_pair(d, 0, 0);
  const AmplitudeCache c = psi_amplitudes(psi1);
  // psi1 = exp(-eps z) is the coherent state at -eps
  const C peak = -d.eps_plus;
  GridSpec g;
  g.x_min = peak.real();
  g.x_max = peak.real() + 1;
  g.y_min = peak.imag();
  g.y_max = peak.imag() + 1;
  g.nx = g.ny = 3;
  const PhaseGrid Q = q_function(c, g);
  CHECK(Q.at(0, 0) == Catch::Approx(1 / pi).epsilon(1e-12));
  CHECK(Q.at(1, 1) < Q.at(0, 0));
}

TEST_CASE("Wigner is twice the + mode Husimi at scaled argument") {
  const AmplitudeCache c = cache_for(generic_point());
  const GridSpec g = square(3, 41);
  GridSpec gq = g;
  gq.x_min *= sqrt2;
  gq.x_max *= sqrt2;
  gq.y_min *= sqrt2;
  gq.y_max *= sqrt2;
  const PhaseGrid W = wigner_pure(c, g), Q = q_function(c, gq);
  double worst = 0.0;
  for (std::size_t k = 0; k < W.values.size(); ++k) worst = std::max(worst, std::abs(W.values[k] - 2 * Q.values[k]));
  CHECK(worst < 1e-10);
}

TEST_CASE("pure coherent Wigner function") {
  PhysicalParams p;
  p.Delta = 0.4;
  p.Lambda2 = C(1.5, 0.5);
  p.kappa1 = 0.2;
  p.kappa2 = 0.1;
  DerivedParams d = derive(p);
  p.Lambda1 = d.eps_plus * d.D * p.tildeK() / (2.0 * sqrt2);
  d = derive(p);
  REQUIRE(classify(d).kind == PhaseKind::PureCoherent);
  const AmplitudeCache c = psi_amplitudes(solve_dark_state(d, classify(d)));
  const C gamma = I * std::sqrt(d.lambda2);
  const GridSpec g = square(3, 31);
  const PhaseGrid W = wigner_pure(c, g);
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      worst = std::max(worst, std::abs(W.at(i, j) - 2 / pi * std::exp(-2 * std::norm(g.z(i, j) - gamma / sqrt2))));
  CHECK(worst < 1e-12);
}

TEST_CASE("closed-form and numeric Wigner functions agree") {
  const PhysicalParams p = generic_point();
  const SolveResult r = solve(p);
  const GridSpec g = square(3.5, 29);
  const PhaseGrid Wc = wigner_pure(r.cache, g);
  const PhaseGrid Wn = wigner_numeric(r.rho, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < Wc.values.size(); ++k) worst = std::max(worst, std::abs(Wc.values[k] - Wn.values[k]));
  CHECK(worst < 1e-8);
  CHECK(grid_min(Wc) >= -1e-12);
  CHECK(integrate(wigner_pure(r.cache, square(6, 121))) == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mode-pair Wigner functions") {
  PhysicalParams p;
  p.Lambda2 = 2;
  p.kappa2 = 0.5;
  const DerivedParams d = derive(p);
  auto [psi1, psi2] = bistable_pair(d, 0, 0);
  const AmplitudeCache c1 = psi_amplitudes(psi1), c2 = psi_amplitudes(psi2);
  const GridSpec g = square(5, 161);
  const ComplexPhaseGrid W11 = wigner_mode_pair(c1, c1, g);
  const PhaseGrid Wp = wigner_pure(c1, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < Wp.values.size(); ++k) worst = std::max(worst, std::abs(W11.values[k] - Wp.values[k]));
  CHECK(worst < 1e-14);
  CHECK(std::abs(integrate(W11) - 1.0) < 1e-8);
  const ComplexPhaseGrid W12 = wigner_mode_pair(c1, c2, g);
  const C tr = analysis::mode_operator(psi1, psi2, 40).trace();
  CHECK(std::abs(integrate(W12) - tr) < 1e-8);
}

TEST_CASE("parity states show Wigner negativity") {
  PhysicalParams p;
  p.kappa2 = 1;
  p.Lambda2 = 3;
  p.Delta = 0.2;
  const ParityResult r = parity_solve(p);
  const GridSpec g = square(4, 41);
  const PhaseGrid Wo = wigner_numeric(r.rho_o, g);
  CHECK(grid_min(Wo) < -0.05);
  CHECK(integrate(Wo) == Catch::Approx(1.0).epsilon(1e-6));
  // the mixture rho+ itself is a dark-state trace and stays positive
  CHECK(grid_min(wigner_pure(r.cache, g)) >= -1e-12);
}

TEST_CASE("grid files round trip") {
  const AmplitudeCache c = cache_for(generic_point());
  const GridSpec g = square(2, 7);
  const PhaseGrid W = wigner_pure(c, g);
  std::stringstream ss;
  write_grid(ss, W, {"config {}", "path closed-form"});
  const std::string text = ss.str();
  CHECK(text.rfind("# -2 2 -2 2 7 7\n", 0) == 0);
  bool cplx_flag = true;
  const ComplexPhaseGrid back = read_grid(ss, &cplx_flag);
  CHECK_FALSE(cplx_flag);
  for (std::size_t k = 0; k < W.values.size(); ++k) CHECK(back.values[k].real() == W.values[k]);

  PhysicalParams p;
  p.Lambda2 = 2;
  p.kappa2 = 0.5;
  auto [psi1, psi2] = bistable_pair(derive(p), 0, 0);
  const ComplexPhaseGrid W12 = wigner_mode_pair(psi_amplitudes(psi1), psi_amplitudes(psi2), g);
  std::stringstream cs;
  write_grid(cs, W12);
  const ComplexPhaseGrid back2 = read_grid(cs, &cplx_flag);
  CHECK(cplx_flag);
  for (std::size_t k = 0; k < W12.values.size(); ++k) CHECK(back2.values[k] == W12.values[k]);

  std::stringstream bad("# 0 1 0 1 2\n");
  CHECK_THROWS_AS(read_grid(bad), Error);
  std::stringstream short_rows("# 0 1 0 1 2 2\n0 0 1\n");
  CHECK_THROWS_AS(read_grid(short_rows), Error);
  GridSpec empty = square(1, 1);
  CHECK_THROWS_AS(wigner_pure(c, empty), Error);
}
