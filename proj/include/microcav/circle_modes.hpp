#pragma once

// Analytic modes of the circular cavity (epsilon = 0), used to seed sweeps from the
// quantum numbers (m, l): m angular order, l radial order.

#include <cmath>
#include <complex>
#include <vector>

#include "microcav/bessel.hpp"
#include "microcav/errors.hpp"
#include "microcav/roots.hpp"

namespace microcav {

namespace special {

/// J_0..J_order at complex z by Miller's backward recurrence, scaled to the series J0 or J1.
inline std::vector<cplx> bessel_j_orders(int order, cplx z) {
  if (order < 0) throw DomainError("bessel_j_orders: order must be >= 0");
  if (z == cplx(0.0, 0.0)) {
    std::vector<cplx> out(std::size_t(order) + 1, 0.0);
    out[0] = 1.0;
    return out;
  }
  const int start = 2 * ((order + int(std::abs(z)) + 40) / 2);
  std::vector<cplx> f(std::size_t(start) + 2, 0.0);
  f[std::size_t(start)] = 1e-250;
  for (int k = start; k >= 1; --k) {
    f[std::size_t(k - 1)] = (2.0 * k / z) * f[std::size_t(k)] - f[std::size_t(k + 1)];
    if (std::abs(f[std::size_t(k - 1)]) > 1e250)
      for (auto& v : f) v *= 1e-250;
  }
  const auto ref = cylinder_functions(z);
  const cplx scale = std::abs(ref.j0) >= std::abs(ref.j1) ? ref.j0 / f[0] : ref.j1 / f[1];
  std::vector<cplx> out(std::size_t(order) + 1);
  for (int k = 0; k <= order; ++k) out[std::size_t(k)] = f[std::size_t(k)] * scale;
  return out;
}

/// Y_0..Y_order by forward recurrence (stable for Y).
inline std::vector<cplx> bessel_y_orders(int order, cplx z) {
  const auto ref = cylinder_functions(z);
  std::vector<cplx> out(std::size_t(std::max(order, 1)) + 1);
  out[0] = ref.y0;
  out[1] = ref.y1;
  for (int k = 1; k < order; ++k)
    out[std::size_t(k + 1)] = (2.0 * k / z) * out[std::size_t(k)] - out[std::size_t(k - 1)];
  out.resize(std::size_t(order) + 1);
  return out;
}

}  // namespace special

/// l-th positive zero of J_m (real), m >= 0, l >= 1.
inline double bessel_j_zero(int m, int l) {
  if (m < 0 || l < 1) throw DomainError("bessel_j_zero: need m >= 0 and l >= 1");
  auto jm = [m](double x) { return special::bessel_j_orders(m, x)[std::size_t(m)].real(); };
  double x = std::max(double(m), 0.5);  // j_{m,1} > m
  double fx = jm(x);
  int found = 0;
  const double step = 0.05;
  for (int guard = 0; guard < 1000000; ++guard) {
    const double x2 = x + step, f2 = jm(x2);
    if ((fx < 0.0) != (f2 < 0.0) && fx != 0.0) {
      if (++found == l) {
        double lo = x, hi = x2, flo = fx;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
          const double mid = 0.5 * (lo + hi), fm = jm(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    x = x2;
    fx = f2;
  }
  throw ConvergenceError("bessel_j_zero: zero not bracketed");
}

/// Closed circle eigenvalue on the k axis: j_{m,l} / n.
inline double circle_closed_eigenvalue(int m, int l, double n) { return bessel_j_zero(m, l) / n; }

/// n J_m'(n k) H_m(k) - J_m(n k) H_m'(k); zero at TM resonances of the unit disk.
inline cplx circle_tm_characteristic(int m, double n, cplx k) {
  const int top = m + 1;
  const auto j = special::bessel_j_orders(top, n * k);
  const auto y = special::bessel_y_orders(top, k);
  const cplx i1(0.0, 1.0);
  const auto jk = special::bessel_j_orders(top, k);
  const cplx hm = jk[std::size_t(m)] + i1 * y[std::size_t(m)];
  const cplx hp1 = jk[std::size_t(m + 1)] + i1 * y[std::size_t(m + 1)];
  // C_m' = (m/z) C_m - C_{m+1}
  const cplx jm = j[std::size_t(m)];
  const cplx jmp = double(m) / (n * k) * jm - j[std::size_t(m + 1)];
  const cplx hmp = double(m) / k * hm - hp1;
  return n * jmp * hm - jm * hmp;
}

/// TM resonance of the circle with quantum numbers (m, l): the root with
/// j_{m,l-1}/n < Re k <= j_{m,l}/n closest to j_{m,l}/n.
inline cplx circle_open_resonance(int m, int l, double n) {
  const double hi = circle_closed_eigenvalue(m, l, n);
  const double lo = l > 1 ? circle_closed_eigenvalue(m, l - 1, n) : 0.5 * hi;
  auto logf = [&](cplx k) { return std::log(circle_tm_characteristic(m, n, k)); };
  cplx best{};
  bool have = false;
  for (double re = hi; re > lo; re -= 0.1) {
    const cplx seed(re, -0.05);
    const auto r = muller_log(logf, seed - 0.01, seed + 0.01, seed + cplx(0.0, 0.005), 1e-13, 100);
    if (!r.converged) continue;
    const cplx k = r.root;
    if (!(k.real() > lo && k.real() <= hi && k.imag() < 0.0 && k.imag() > -0.5)) continue;
    if (!have || std::abs(k.real() - hi) < std::abs(best.real() - hi)) best = k;
    have = true;
  }
  if (!have) throw ConvergenceError("circle_open_resonance: no root found");
  return best;
}

}  // namespace microcav
