#pragma once

// Reference values computed independently of the library: Boost special functions and
// quadrature, integral representations for complex-argument Bessel functions, and a
// closed-form 2x2 eigensolver.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline double ellipse_perimeter(double a, double b) {
  auto f = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2.0 * pi, 15, 1e-14);
}

inline double dirichlet_zero(int m, int l) { return boost::math::cyl_bessel_j_zero(double(m), l); }

template <class F>
cplx integrate_complex(F f, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double re = GK::integrate([&](double t) { return f(t).real(); }, lo, hi, 12, 1e-13);
  const double im = GK::integrate([&](double t) { return f(t).imag(); }, lo, hi, 12, 1e-13);
  return {re, im};
}

/// J_m(z) = (1/2pi) int_0^2pi cos(m t - z sin t) dt; the trapezoid rule converges
/// geometrically for this periodic entire integrand.
inline cplx bessel_j(int m, cplx z) {
  const int n = 256;
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * pi * i / n;
    s += std::cos(double(m) * t - z * std::sin(t));
  }
  return s / double(n);
}

/// Y_m(z) = (1/pi) int_0^pi sin(z sin t - m t) dt
///        - (1/pi) int_0^inf (e^{m t} + (-1)^m e^{-m t}) e^{-z sinh t} dt,   Re z > 0.
inline cplx bessel_y(int m, cplx z) {
  const cplx a =
      integrate_complex([&](double t) { return std::sin(z * std::sin(t) - double(m) * t); }, 0.0, pi);
  const double sgn = m % 2 == 0 ? 1.0 : -1.0;
  auto tail = [&](double t) {
    return (std::exp(double(m) * t) + sgn * std::exp(-double(m) * t)) * std::exp(-z * std::sinh(t));
  };
  // The integrand is negligible well before sinh t ~ 60 / Re z.
  const double stop = std::asinh(80.0 / z.real()) + 1.0;
  const cplx b = integrate_complex(tail, 0.0, stop);
  return (a - b) / pi;
}

inline cplx hankel1(int m, cplx z) { return bessel_j(m, z) + cplx(0.0, 1.0) * bessel_y(m, z); }

/// n J_m'(n k) H_m(k) - J_m(n k) H_m'(k) with C' = (C_{m-1} - C_{m+1}) / 2.
inline cplx tm_characteristic(int m, double n, cplx k) {
  const cplx jm = bessel_j(m, n * k);
  const cplx jd = 0.5 * (bessel_j(m - 1, n * k) - bessel_j(m + 1, n * k));
  const cplx hm = hankel1(m, k);
  const cplx hd = 0.5 * (hankel1(m - 1, k) - hankel1(m + 1, k));
  return n * jd * hm - jm * hd;
}

/// Secant iteration on the characteristic function.
inline cplx tm_resonance(int m, double n, cplx seed) {
  cplx x0 = seed, x1 = seed + cplx(1e-3, -1e-3);
  cplx f0 = tm_characteristic(m, n, x0), f1 = tm_characteristic(m, n, x1);
  for (int it = 0; it < 60 && std::abs(x1 - x0) > 1e-13; ++it) {
    const cplx x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = tm_characteristic(m, n, x1);
  }
  return x1;
}

/// Eigenvalues of [[w1, d], [d, w2]] from Eigen's general complex solver.
inline std::pair<cplx, cplx> dense_eigenvalues(cplx w1, cplx w2, double coupling) {
  Eigen::Matrix2cd h;
  h << w1, coupling, coupling, w2;
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(h, false);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace oracle
