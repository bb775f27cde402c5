#include <catch_amalgamated.hpp>

#include <kerrcqa/analysis.hpp>

using namespace kerrcqa;
using C = std::complex<double>;

namespace {

PhysicalParams two_photon_blockade(double kappa1) {
  PhysicalParams p;
  p.Delta = 5;
  p.Lambda2 = 4;
  p.kappa1 = kappa1;
  return p;
}

PhysicalParams three_photon_blockade() {
  PhysicalParams p;
  p.Delta = 1;
  p.Lambda3 = 1;
  p.kappa1 = 0.01;
  p.kappa2 = 0.001;
  return p;
}

std::size_t argmin(const analysis::ScanResult& s) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    if (s.rows[i].mean_n < s.rows[best].mean_n) best = i;
  return best;
}

}  // namespace

TEST_CASE("blockade points of the two-photon drive") {
  const auto pts = analysis::locate_blockade_points(two_photon_blockade(0.01), 4);
  REQUIRE(pts.size() == 5);
  CHECK(std::abs(pts[0].Lambda1 - C(0.01, -10)) < 1e-12);
  for (std::size_t n = 1; n < pts.size(); ++n) CHECK(std::abs(pts[n].Lambda1 - pts[n - 1].Lambda1 - C(0, 2)) < 1e-12);
  for (const auto& b : pts) CHECK(b.residual < 1e-10);
  PhysicalParams bare;
  CHECK_THROWS_AS(analysis::locate_blockade_points(bare, 2), Error);
}

TEST_CASE("blockade points of the three-photon drive sit near integer drives") {
  const auto pts = analysis::locate_blockade_points(three_photon_blockade(), 3);
  for (const auto& b : pts) {
    CHECK(b.residual < 1e-10);
    CHECK(std::abs(b.Lambda1 + static_cast<double>(b.n)) < 0.05);
  }
}

TEST_CASE("a one-point scan reproduces solve") {
  PhysicalParams p;
  p.Delta = 0.7;
  p.Lambda1 = {0.8, -0.3};
  p.Lambda2 = {0.5, 0.2};
  p.Lambda3 = {0.3, 0.4};
  p.kappa1 = 0.4;
  p.kappa2 = 0.2;
  analysis::Axis ax;
  ax.name = analysis::AxisName::Delta;
  ax.from = ax.to = 0.7;
  const auto s = analysis::scan(p, ax, 1);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].mean_n == solve(p).mean_n);
  CHECK(s.rows[0].cls == to_string(solve(p).cls));
  CHECK_THROWS_AS(analysis::scan(p, ax, 0), Error);
  CHECK_THROWS_AS(analysis::parse_axis("Lambda4"), Error);
}

TEST_CASE("scan rows are ordered and agree with the oracle") {
  PhysicalParams p;
  p.Lambda2 = {1.0, 0.3};
  p.kappa1 = 0.5;
  p.kappa2 = 0.1;
  analysis::Axis ax;
  ax.name = analysis::AxisName::Lambda1;
  ax.from = {-1, -1};
  ax.to = {1, 1};
  analysis::ScanOptions opt;
  opt.oracle = true;
  opt.oracle_stride = 3;
  opt.fock_levels = 4;
  std::vector<std::size_t> seen;
  const auto s = analysis::scan(p, ax, 9, opt, [&](const analysis::ScanRow& r) { seen.push_back(r.index); });
  REQUIRE(seen.size() == 9);
  CHECK(s.failures == 0);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
  CHECK(std::abs(s.rows.back().value - C(1, 1)) < 1e-15);
  for (const auto& r : s.rows) {
    CHECK(r.fock_probs.size() == 4);
    CHECK(r.oracle_mean_n.has_value() == (r.index % 3 == 0));
    if (r.oracle_mean_n) CHECK(*r.oracle_mean_n == Catch::Approx(r.mean_n).epsilon(1e-6));
    CHECK_FALSE(r.branches.empty());
  }
}

TEST_CASE("blockade dips widen with loss") {
  // the dips are far narrower than kappa1, so the window is a few times 1e-5 wide
  double last = 0.0;
  for (double k1 : {0.01, 0.05, 0.1}) {
    const PhysicalParams p = two_photon_blockade(k1);
    const C centre = analysis::locate_blockade_points(p, 1)[1].Lambda1;
    analysis::Axis ax;
    ax.name = analysis::AxisName::Lambda1;
    ax.from = centre - C(0, 3e-5);
    ax.to = centre + C(0, 3e-5);
    analysis::ScanOptions opt;
    opt.classical = false;
    const auto s = analysis::scan(p, ax, 1201, opt);
    REQUIRE(s.failures == 0);
    const std::size_t imin = argmin(s);
    CHECK(std::abs(s.rows[imin].value - centre) < 1e-7);
    CHECK(s.rows[imin].mean_n < 0.5 * s.rows.front().mean_n);
    const double w = analysis::dip_width(s, imin);
    CHECK(w < 1e-3 * k1);
    CHECK(w > last);
    last = w;
  }
}

TEST_CASE("three-photon drive dips at the blockade points") {
  PhysicalParams p = three_photon_blockade();
  analysis::Axis ax;
  ax.name = analysis::AxisName::Lambda1;
  ax.from = -2.5;
  ax.to = -0.5;
  analysis::ScanOptions opt;
  opt.classical = false;
  opt.fock_levels = 3;
  const auto s = analysis::scan(p, ax, 201, opt);
  REQUIRE(s.failures == 0);
  for (int n : {1, 2}) {
    const auto b = analysis::locate_blockade_points(p, n)[n];
    PhysicalParams q = p;
    q.Lambda1 = b.Lambda1;
    const SolveResult r = solve(q);
    double tail = 0.0;
    for (int m = n + 1; m < r.rho.rho.rows(); ++m) tail += r.rho.rho(m, m).real();
    CHECK(tail < 1e-9);
  }
}

TEST_CASE("anti-blockade classes along a detuning scan") {
  PhysicalParams p;
  p.Lambda1 = 0.4;
  p.kappa1 = 1e-12;
  analysis::Axis ax;
  ax.name = analysis::AxisName::Delta;
  ax.from = 0;
  ax.to = 2;
  analysis::ScanOptions opt;
  opt.classical = false;
  opt.tol = 1e-6;
  const auto s = analysis::scan(p, ax, 5, opt);
  for (const auto& r : s.rows) {
    const int m = static_cast<int>(std::lround(2 * r.value.real()));
    CHECK(std::abs(r.r2 - static_cast<double>(m)) < 1e-6);
    CHECK(r.cls.find(std::to_string(m)) != std::string::npos);
  }
}

TEST_CASE("metastability report at a small cutoff") {
  PhysicalParams p;
  p.Lambda2 = 2;
  const auto rows = analysis::metastability_report(p, 1, {0.1, 0.02}, 30);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    INFO(r.error);
    REQUIRE(r.ok());
    CHECK(r.gamma1 < r.kappa1);
    CHECK(r.gamma1 < r.gamma2);
    CHECK(r.one_minus_P_bistable < r.one_minus_P_coherent);
    CHECK(r.basis_rank >= 2);
  }
  CHECK(rows[1].ratio() > rows[0].ratio());
  PhysicalParams none;
  CHECK_THROWS_AS(analysis::metastability_report(none, 1, {0.1}), Error);
}

TEST_CASE("parity report") {
  PhysicalParams p;
  p.kappa2 = 1;
  p.Lambda2 = 2;
  const auto rows = analysis::parity_report(p, {0.0, 0.5, 5.0});
  for (const auto& r : rows) {
    INFO(r.error);
    REQUIRE(r.ok());
    CHECK(r.parity_even == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(r.parity_odd == Catch::Approx(-1.0).epsilon(1e-10));
    CHECK(r.N == Catch::Approx(r.N_sum).epsilon(1e-10));
    CHECK(r.uhlmann_even_cat <= 1.0 + 1e-6);
  }
  CHECK(rows[0].F_even_cat > 0.999);
  CHECK(rows[2].F_even_vacuum > rows[0].F_even_vacuum);
  PhysicalParams lossy = p;
  lossy.kappa1 = 0.1;
  CHECK_THROWS_AS(analysis::parity_report(lossy, {0.0}), Error);
}

TEST_CASE("phase diagram cells") {
  // without one-photon loss r2 is real, so integer cells are reachable
  PhysicalParams p;
  p.Lambda2 = 4;
  const auto cells = analysis::phase_diagram(p, {0, 2}, {0, 2}, 3, 3);
  REQUIRE(cells.size() == 9);
  for (const auto& c : cells) {
    INFO(c.error);
    REQUIRE(c.ok());
    CHECK(std::abs(c.r1 - c.r1_target) < 1e-9);
    CHECK(std::abs(c.r2 - c.r2_target) < 1e-9);
  }
  CHECK(cells[1].r1_target == 1.0);
  CHECK(cells[3].r2_target == 1.0);
  CHECK(cells[0].cls == "Bistable(0,0)");
  CHECK(cells[3].cls == "Bistable(0,1)");
  CHECK(cells[1].cls == "MediumWindow(0,1)");
  CHECK(cells[8].cls == "Bistable(2,2)");
  const auto diag = analysis::phase_diagram(p, {0.5, 0.5}, {0.5, 0.5}, 1, 1);
  CHECK(diag[0].cls == "PureCoherent");
  const auto off = analysis::phase_diagram(p, {0.5, 0.5}, {1.5, 1.5}, 1, 1);
  CHECK(off[0].cls == "Generic");

  PhysicalParams lossy = p;
  lossy.kappa1 = 0.01;
  CHECK(analysis::phase_diagram(lossy, {0, 0}, {0, 0}, 1, 1)[0].cls == "Blockade(0)");
  CHECK_THROWS_AS(analysis::phase_diagram(p, {0, 1}, {0, 1}, 0, 1), Error);
}
