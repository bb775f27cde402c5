#pragma once

// Generalized hypergeometric series and the special functions built on them.
// Everything is templated on the complex type. std::complex<double> inputs are
// re-evaluated at 50 or 100 digits when the partial sums show cancellation.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_complex.hpp>

#include "errors.hpp"

namespace kerrcqa::hyperfun {

using ext50 = boost::multiprecision::cpp_complex_50;
using ext100 = boost::multiprecision::cpp_complex_100;

struct SeriesControl {
  double rel_tol = 1e-15;
  std::size_t max_terms = 100000;

  void check() const {
    if (!(rel_tol > 0.0) || rel_tol > 1e-6)
      throw Error(ErrorKind::InvalidConfig, "rel_tol must lie in (0, 1e-6]");
    if (max_terms < 100) throw Error(ErrorKind::InvalidConfig, "max_terms must be at least 100");
  }
};

// Parameters within this distance of a nonpositive integer count as that integer.
inline constexpr double pole_tol = 1e-9;

namespace detail {

template <class C>
double re(const C& z) {
  return static_cast<double>(z.real());
}
template <class C>
double im(const C& z) {
  return static_cast<double>(z.imag());
}
template <class C>
double mag(const C& z) {
  using std::abs;
  return static_cast<double>(abs(z));
}

// k >= 0 when z sits on -k, otherwise -1.
template <class C>
long nonpositive_index(const C& z, double tol = pole_tol) {
  double x = re(z), y = im(z);
  if (x > tol || std::abs(y) >= tol) return -1;
  double k = std::round(-x);
  if (k < 0) k = 0;
  if (std::abs(x + k) < tol) return static_cast<long>(k);
  return -1;
}

template <class To, class From>
To convert(const From& z) {
  if constexpr (std::is_same_v<To, From>) {
    return z;
  } else if constexpr (std::is_same_v<From, std::complex<double>>) {
    return To(z.real(), z.imag());
  } else if constexpr (std::is_same_v<To, std::complex<double>>) {
    return To(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  } else {
    return To(z);
  }
}

template <class C>
struct SeriesResult {
  C sum;
  double max_term;
};

template <class C>
SeriesResult<C> pfq_raw(const std::vector<C>& a, const std::vector<C>& b, const C& z,
                        const SeriesControl& ctl) {
  long term_a = -1;
  for (const auto& ai : a) {
    long k = nonpositive_index(ai);
    if (k >= 0 && (term_a < 0 || k < term_a)) term_a = k;
  }
  for (const auto& bj : b) {
    long k = nonpositive_index(bj);
    if (k >= 0 && (term_a < 0 || k < term_a))
      throw Error(ErrorKind::PoleAtParameter, "lower parameter at a nonpositive integer");
  }
  C sum(1), term(1);
  double max_term = 1.0;
  if (mag(z) == 0.0) return {sum, max_term};
  const std::size_t lmax = term_a >= 0 ? static_cast<std::size_t>(term_a) : ctl.max_terms;
  int small = 0;
  for (std::size_t l = 0; l < lmax; ++l) {
    C ratio = z / C(static_cast<double>(l + 1));
    for (const auto& ai : a) ratio *= ai + C(static_cast<double>(l));
    for (const auto& bj : b) ratio /= bj + C(static_cast<double>(l));
    term *= ratio;
    sum += term;
    double t = mag(term);
    if (t > max_term) max_term = t;
    if (term_a >= 0) continue;
    if (t <= ctl.rel_tol * mag(sum) && mag(ratio) < 1.0) {
      if (++small >= 2) return {sum, max_term};
    } else {
      small = 0;
    }
  }
  if (term_a >= 0) return {sum, max_term};
  throw Error(ErrorKind::NonConvergence, "hypergeometric series did not converge");
}

template <class C>
std::vector<C> shifted(const std::vector<C>& v, const C& s) {
  std::vector<C> out = v;
  for (auto& x : out) x += s;
  return out;
}

}  // namespace detail

template <class C>
C pochhammer(const C& z, unsigned n) {
  C p(1);
  for (unsigned k = 0; k < n; ++k) p *= z + C(static_cast<double>(k));
  return p;
}

// Lanczos approximation (g = 7) with reflection. Branch is principal up to 2 pi i.
inline std::complex<double> lgamma(std::complex<double> z) {
  static const double g = 7.0;
  static const double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double pi = 3.14159265358979323846;
  if (z.real() < 0.5) {
    return std::log(pi) - std::log(std::sin(pi * z)) - lgamma(1.0 - z);
  }
  z -= 1.0;
  std::complex<double> x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
  std::complex<double> t = z + g + 0.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline std::complex<double> gamma(std::complex<double> z) {
  if (detail::nonpositive_index(z, 1e-14) >= 0)
    throw Error(ErrorKind::PoleAtParameter, "gamma at a nonpositive integer");
  return std::exp(lgamma(z));
}

// pFq(a; b; z). Terminating series (an upper parameter at -k) are summed exactly.
template <class C>
C pfq(const std::vector<C>& a, const std::vector<C>& b, const C& z, const SeriesControl& ctl = {}) {
  ctl.check();
  if (b.size() + 1 < a.size() && detail::mag(z) != 0.0) {
    bool terminating = false;
    for (const auto& ai : a) terminating = terminating || detail::nonpositive_index(ai) >= 0;
    if (!terminating) throw Error(ErrorKind::NonConvergence, "divergent series with p > q + 1");
  }
  auto r = detail::pfq_raw(a, b, z, ctl);
  if constexpr (std::is_same_v<C, std::complex<double>>) {
    double loss = r.max_term / std::max(detail::mag(r.sum), 1e-300);
    if (loss > 1e3) {
      auto up = [](const std::vector<C>& v, auto tag) {
        using T = decltype(tag);
        std::vector<T> out;
        for (const auto& x : v) out.push_back(detail::convert<T>(x));
        return out;
      };
      SeriesControl fine = ctl;
      fine.rel_tol = std::min(ctl.rel_tol, 1e-18);
      if (loss < 1e30) {
        auto e = detail::pfq_raw(up(a, ext50{}), up(b, ext50{}), detail::convert<ext50>(z), fine);
        return detail::convert<C>(e.sum);
      }
      auto e = detail::pfq_raw(up(a, ext100{}), up(b, ext100{}), detail::convert<ext100>(z), fine);
      return detail::convert<C>(e.sum);
    }
  }
  return r.sum;
}

// 1F1 with Kummer's transformation for Re z < 0 (non-terminating case).
template <class C>
C kummer_1f1(const C& a, const C& b, const C& z, const SeriesControl& ctl = {}) {
  using std::exp;
  if (detail::nonpositive_index(a) >= 0 || detail::re(z) >= 0.0) return pfq<C>({a}, {b}, z, ctl);
  long kb = detail::nonpositive_index(b);
  if (kb >= 0) throw Error(ErrorKind::PoleAtParameter, "1F1 lower parameter at a nonpositive integer");
  return exp(z) * pfq<C>({b - a}, {b}, -z, ctl);
}

// Gamma(s, z) for positive integer s only.
template <class C>
C upper_incomplete_gamma(const C& s, const C& z) {
  using std::exp;
  double sr = detail::re(s);
  double n1 = std::round(sr);
  if (n1 < 1.0 || std::abs(sr - n1) > pole_tol || std::abs(detail::im(s)) > pole_tol)
    throw Error(ErrorKind::Unsupported, "incomplete gamma only for positive integer order");
  const int n = static_cast<int>(n1) - 1;
  C sum(0), term(1), fact(1);
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      term *= z / C(static_cast<double>(k));
      fact *= C(static_cast<double>(k));
    }
    sum += term;
  }
  return fact * exp(-z) * sum;
}

// J_nu(x) through 0F1.
inline std::complex<double> bessel_j(std::complex<double> nu, std::complex<double> x,
                                     const SeriesControl& ctl = {}) {
  long k = detail::nonpositive_index(nu + 1.0);
  if (k >= 0) {
    // nu = -(k+1): J_{-m} = (-1)^m J_m
    const double m = static_cast<double>(k + 1);
    return ((k + 1) % 2 ? -1.0 : 1.0) * bessel_j(std::complex<double>(m, 0.0), x, ctl);
  }
  std::complex<double> pre = std::pow(0.5 * x, nu) * std::exp(-lgamma(nu + 1.0));
  return pre * pfq<std::complex<double>>({}, {nu + 1.0}, -0.25 * x * x, ctl);
}

// Generalized Laguerre polynomial L_n^(alpha)(z), summed explicitly.
template <class C>
C laguerre(unsigned n, const C& alpha, const C& z) {
  C sum(0), zk(1), kfact(1);
  for (unsigned k = 0; k <= n; ++k) {
    if (k > 0) {
      zk *= -z;
      kfact *= C(static_cast<double>(k));
    }
    C coef = pochhammer(alpha + C(static_cast<double>(k + 1)), n - k);
    C nk(1);
    for (unsigned j = 2; j <= n - k; ++j) nk *= C(static_cast<double>(j));
    sum += coef / nk * zk / kfact;
  }
  return sum;
}

// Same polynomial as binom(n + alpha, n) 1F1(-n; alpha + 1; z).
template <class C>
C laguerre_via_1f1(unsigned n, const C& alpha, const C& z) {
  C binom = pochhammer(alpha + C(1.0), n);
  for (unsigned j = 2; j <= n; ++j) binom /= C(static_cast<double>(j));
  return binom * pfq<C>({C(-static_cast<double>(n))}, {alpha + C(1.0)}, z);
}

}  // namespace kerrcqa::hyperfun
