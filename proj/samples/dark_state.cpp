#include <cstdio>

#include <kerrcqa/analysis.hpp>
#include <kerrcqa/oracle.hpp>

using namespace kerrcqa;

// Three-photon drive tuned to the one-photon blockade point, checked against the brute-force solver.
int main() {
  PhysicalParams p;
  p.Delta = 1;
  p.Lambda3 = 1;
  p.kappa1 = 0.01;
  p.kappa2 = 0.001;
  p.Lambda1 = analysis::locate_blockade_points(p, 1)[1].Lambda1;

  const SolveResult r = solve(p);
  std::printf("Lambda1 = %.6f %+.6fi  class %s\n", p.Lambda1.real(), p.Lambda1.imag(), to_string(r.cls).c_str());
  std::printf("<n> = %.12f\n", r.mean_n);
  for (int m = 0; m < 4 && m < r.rho.rho.rows(); ++m) std::printf("P(%d) = %.3e\n", m, r.rho.rho(m, m).real());

  const auto o = oracle::steady_state(oracle::build_liouvillian(p, 40));
  std::printf("brute force <n> = %.12f\n", o.mean_n());
  return 0;
}
