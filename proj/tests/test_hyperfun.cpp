#include <catch_amalgamated.hpp>

#include <random>

#include <kerrcqa/hyperfun.hpp>

using namespace kerrcqa;
using namespace kerrcqa::hyperfun;
using C = std::complex<double>;

namespace {

double rel(C a, C b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("pochhammer basics") {
  CHECK(pochhammer(C(2.5, 1.0), 0) == C(1.0));
  CHECK(std::abs(pochhammer(C(1.0), 6) - 720.0) < 1e-12);
  CHECK(pochhammer(C(-3.0), 5) == C(0.0));
  CHECK(rel(pochhammer(C(0.5, 0.2), 3), C(0.5, 0.2) * C(1.5, 0.2) * C(2.5, 0.2)) < 1e-15);
}

TEST_CASE("series values against high-precision references") {
  CHECK(rel(pfq<C>({C(0.5, 0.2)}, {C(1.3, -0.4)}, C(2, 3)), C(-0.3681515389458322525, 0.0061058595397841354093)) < 1e-13);
  CHECK(rel(kummer_1f1(C(0.5, 0.2), C(1.3, -0.4), C(-7, 2)), C(0.2817183726140570662, -0.1972673274123706468)) < 1e-13);
  CHECK(rel(kummer_1f1(C(1.5), C(2.25), C(0, 15)), C(0.036567489690344752286, 0.17182642270750643507)) < 1e-12);
  CHECK(rel(pfq<C>({C(0.3, 1), C(0.3, -1)}, {C(2.5, 0.1), C(2.5, -0.1)}, C(4.0)), C(2.2058956118812856214, 0)) < 1e-13);
  CHECK(rel(pfq<C>({C(0.5)}, {C(0.2, 0.7), C(0.2, -0.7)}, C(3.0)), C(9.1182554258749368375, 0)) < 1e-13);
  CHECK(rel(pfq<C>({C(1.5), C(0.75)}, {C(0.4, 0.2), C(1.1, -0.3), C(0.5)}, C(2.2)),
            C(25.360475763306842239, -4.7942465481397029123)) < 1e-13);
  CHECK(rel(pfq<C>({C(0.3), C(1.2, 0.5)}, {C(2.1)}, C(0.4, -0.3)), C(1.1086767392413134881, -0.04549882758565720681)) < 1e-13);
}

TEST_CASE("terminating series and poles") {
  const C z(0.7, -1.1);
  // 1F1(-2; b; z) = 1 - 2z/b + z^2/(b(b+1))
  const C b(1.5, 0.5);
  CHECK(rel(pfq<C>({C(-2.0)}, {b}, z), 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0))) < 1e-15);
  // upper parameter terminates before the lower one vanishes
  CHECK(rel(pfq<C>({C(-1.0)}, {C(-2.0)}, z), 1.0 + z / 2.0) < 1e-15);
  CHECK_THROWS_MATCHES(pfq<C>({C(1.0)}, {C(-2.0)}, z), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::PoleAtParameter; }));
  CHECK_THROWS_AS(pfq<C>({C(1.0)}, {C(-3.0 + 1e-11)}, z), Error);
  CHECK(pfq<C>({C(1.0)}, {C(2.0)}, C(0.0)) == C(1.0));
}

TEST_CASE("convergence failures are reported") {
  auto kind = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidConfig;
  };
  CHECK(kind([] { pfq<C>({C(0.5), C(1.5), C(1.0)}, {C(2.0)}, C(0.3)); }) == ErrorKind::NonConvergence);
  CHECK(kind([] { pfq<C>({C(0.5), C(1.5)}, {C(2.0)}, C(1.5)); }) == ErrorKind::NonConvergence);
  SeriesControl tight;
  tight.max_terms = 100;
  CHECK(kind([&] { pfq<C>({C(0.5)}, {C(1.5)}, C(400.0), tight); }) == ErrorKind::NonConvergence);
  SeriesControl bad;
  bad.rel_tol = 0.1;
  CHECK(kind([&] { pfq<C>({C(0.5)}, {C(1.5)}, C(1.0), bad); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("Kummer transformation holds for random complex arguments") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const C a(3 * u(rng), 3 * u(rng)), b(0.6 + 3 * std::abs(u(rng)), 3 * u(rng));
    C z(20 * u(rng), 20 * u(rng));
    if (std::abs(z) > 20) z *= 20 / std::abs(z);
    const ext50 ae(a.real(), a.imag()), be(b.real(), b.imag()), ze(z.real(), z.imag());
    const ext50 lhs = detail::pfq_raw<ext50>({ae}, {be}, ze, SeriesControl{1e-18, 100000}).sum;
    const ext50 rhs = exp(ze) * detail::pfq_raw<ext50>({be - ae}, {be}, -ze, SeriesControl{1e-18, 100000}).sum;
    const C l = detail::convert<C>(lhs), r = detail::convert<C>(rhs);
    CHECK(std::abs(l - r) / std::max(1.0, std::abs(l)) < 1e-12);
    // the double-precision entry point agrees with the extended evaluation
    CHECK(std::abs(kummer_1f1(a, b, z) - l) / std::max(1.0, std::abs(l)) < 1e-12);
  }
}

TEST_CASE("log-gamma and gamma") {
  CHECK(rel(lgamma(C(3.3, 2.0)), C(0.32864752957177730662, 2.2151634615393225693)) < 1e-13);
  CHECK(rel(std::exp(lgamma(C(-2.7, 0.4))), std::exp(C(-0.84963045007744143538, -9.5102062715457042796))) < 1e-12);
  CHECK(rel(gamma(C(5.0)), C(24.0)) < 1e-13);
  CHECK_THROWS_AS(gamma(C(-2.0)), Error);
}

TEST_CASE("Bessel functions through 0F1") {
  CHECK(rel(bessel_j(C(0.0), C(1.0)), C(0.76519768655796655145)) < 1e-14);
  CHECK(rel(bessel_j(C(2.5), C(3.0)), C(0.41271003220971599344)) < 1e-13);
  CHECK(rel(bessel_j(C(1, 1), C(2, -1)), C(2.1892224754216061184, -0.65888483557994428294)) < 1e-12);
  for (int n = 1; n < 5; ++n)
    CHECK(rel(bessel_j(C(-n), C(1.7, 0.3)), (n % 2 ? -1.0 : 1.0) * bessel_j(C(n), C(1.7, 0.3))) < 1e-13);
}

TEST_CASE("upper incomplete gamma for integer order") {
  CHECK(rel(upper_incomplete_gamma(C(4.0), C(2, 1)), C(5.4230777102104039262, -1.182003705522945249)) < 1e-13);
  CHECK(rel(upper_incomplete_gamma(C(5.0), C(0.0)), C(24.0)) < 1e-15);
  CHECK_THROWS_MATCHES(upper_incomplete_gamma(C(2.5), C(1.0)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == ErrorKind::Unsupported; }));
}

TEST_CASE("Laguerre polynomials") {
  CHECK(rel(laguerre(5, C(0.5), C(1.7)), C(-0.10798600000000007967)) < 1e-13);
  CHECK(rel(laguerre(4, C(-2.5, 0.3), C(0.7, -0.2)), C(0.13842083333333333203, 0.064249999999999985373)) < 1e-13);
  for (unsigned n = 0; n < 8; ++n)
    CHECK(rel(laguerre(n, C(0.3, 0.4), C(1.2, -0.5)), laguerre_via_1f1(n, C(0.3, 0.4), C(1.2, -0.5))) < 1e-13);
}
