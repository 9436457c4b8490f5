#pragma once

// Cylinder functions of order 0 and 1 for complex argument.
//
// |z| <= 17: ascending series evaluated in extended precision.
// |z| >  17: Hankel asymptotic expansion, truncated at its smallest term
//            (below 1e-15 relative for |z| > 17).

#include <cmath>
#include <complex>
#include <numbers>

#include "microcav/errors.hpp"

namespace microcav::special {

using cplx = std::complex<double>;

struct CylinderFunctions {
  cplx j0, j1, y0, y1;

  cplx h0() const { return j0 + cplx(0.0, 1.0) * y0; }
  cplx h1() const { return j1 + cplx(0.0, 1.0) * y1; }
};

namespace detail {

inline constexpr double kAsymptoticRadius = 17.0;

inline CylinderFunctions series(cplx zd) {
  using ld = long double;
  using lc = std::complex<long double>;
  constexpr ld pi = std::numbers::pi_v<long double>;
  constexpr ld gamma = std::numbers::egamma_v<long double>;

  const lc z(zd.real(), zd.imag());
  const lc q = -(z * z) / ld(4);
  const lc half = z / ld(2);

  // t0_k = q^k / (k!)^2 and t1_k = t0_k / (k+1), accumulated in real arithmetic
  // (std::complex<long double> products go through a slow checked library call).
  const ld qr = q.real(), qi = q.imag();
  ld tr = 1, ti = 0;
  ld j0r = 1, j0i = 0, j1r = 1, j1i = 0;
  ld y0r = 0, y0i = 0;
  ld y1r = -gamma + (ld(1) - gamma), y1i = 0;  // psi(1) + psi(2)
  ld harmonic = 0;                             // H_k
  ld scale2 = 1;
  for (int k = 1; k < 200; ++k) {
    harmonic += ld(1) / ld(k);
    const ld inv = ld(1) / (ld(k) * ld(k));
    const ld nr = (tr * qr - ti * qi) * inv;
    ti = (tr * qi + ti * qr) * inv;
    tr = nr;
    const ld c1 = ld(1) / ld(k + 1);
    j0r += tr;
    j0i += ti;
    j1r += tr * c1;
    j1i += ti * c1;
    y0r += harmonic * tr;
    y0i += harmonic * ti;
    const ld psi_sum = (ld(2) * (harmonic - gamma) + c1) * c1;
    y1r += psi_sum * tr;
    y1i += psi_sum * ti;
    const ld mag2 = tr * tr + ti * ti;
    scale2 = std::max(scale2, mag2);
    if (mag2 < 1e-42L * scale2 && k > 2) break;
  }
  const lc j0(j0r, j0i), j1s(j1r, j1i), y0s(y0r, y0i), y1s(y1r, y1i);
  const lc j1 = half * j1s;
  const lc logh = std::log(half);
  // Y0 = (2/pi)(ln(z/2) + gamma) J0 - (2/pi) sum H_k (-z^2/4)^k / (k!)^2
  const lc y0 = (ld(2) / pi) * (logh + gamma) * j0 - (ld(2) / pi) * y0s;
  // Y1 = (2/pi) ln(z/2) J1 - 2/(pi z) - (1/pi)(z/2) sum (psi(k+1)+psi(k+2)) q^k / (k!(k+1)!)
  const lc y1 = (ld(2) / pi) * logh * j1 - ld(2) / (pi * z) - (ld(1) / pi) * half * y1s;

  auto to_d = [](const lc& v) { return cplx(double(v.real()), double(v.imag())); };
  return {to_d(j0), to_d(j1), to_d(y0), to_d(y1)};
}

// P and Q of the Hankel expansion for order nu, i.e.
// H^(1)_nu(z) = sqrt(2/(pi z)) e^{i chi} (P + i Q).
inline void hankel_pq(int nu, cplx z, cplx& p, cplx& q) {
  const double mu = 4.0 * nu * nu;
  const cplx inv = 1.0 / z;
  p = 1.0;
  q = 0.0;
  double a = 1.0;
  cplx zp = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    a *= (mu - double((2 * k - 1) * (2 * k - 1))) / (8.0 * k);
    zp *= inv;
    const cplx term = a * zp;
    const double mag = std::abs(term);
    if (mag > last) break;  // asymptotic series started to diverge
    last = mag;
    // i^k pattern: k=1 -> +Q, k=2 -> -P, k=3 -> -Q, k=4 -> +P
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < 1e-17) break;
  }
}

inline CylinderFunctions asymptotic(cplx z) {
  constexpr double pi = std::numbers::pi;
  const cplx s = std::sqrt(2.0 / (pi * z));
  CylinderFunctions out;
  for (int nu = 0; nu <= 1; ++nu) {
    cplx p, q;
    hankel_pq(nu, z, p, q);
    const cplx chi = z - (0.5 * nu + 0.25) * pi;
    const cplx c = std::cos(chi), sn = std::sin(chi);
    const cplx jv = s * (p * c - q * sn);
    const cplx yv = s * (p * sn + q * c);
    if (nu == 0) {
      out.j0 = jv;
      out.y0 = yv;
    } else {
      out.j1 = jv;
      out.y1 = yv;
    }
  }
  return out;
}

}  // namespace detail

/// J0, J1, Y0, Y1 at complex z (principal branch, cut along the negative real axis).
inline CylinderFunctions cylinder_functions(cplx z) {
  if (z == cplx(0.0, 0.0)) throw DomainError("cylinder_functions: Y is singular at z = 0");
  if (std::abs(z) <= detail::kAsymptoticRadius || z.real() <= 0.0) return detail::series(z);
  return detail::asymptotic(z);
}

/// H^(1)_0 and H^(1)_1 only; avoids the separate J/Y assembly on the asymptotic branch.
inline void hankel1_01(cplx z, cplx& h0, cplx& h1) {
  if (z == cplx(0.0, 0.0)) throw DomainError("hankel1_01: singular at z = 0");
  if (std::abs(z) <= detail::kAsymptoticRadius || z.real() <= 0.0) {
    const auto f = detail::series(z);
    h0 = f.h0();
    h1 = f.h1();
    return;
  }
  constexpr double pi = std::numbers::pi;
  const cplx s = std::sqrt(2.0 / (pi * z));
  const cplx i(0.0, 1.0);
  cplx p, q;
  detail::hankel_pq(0, z, p, q);
  h0 = s * std::exp(i * (z - 0.25 * pi)) * (p + i * q);
  detail::hankel_pq(1, z, p, q);
  h1 = s * std::exp(i * (z - 0.75 * pi)) * (p + i * q);
}

}  // namespace microcav::special
