#pragma once

#include <cmath>
#include <complex>
#include <span>

namespace microcav {

using cplx = std::complex<double>;

struct MullerResult {
  cplx root;
  int iterations = 0;
  bool converged = false;
};

/// Muller iteration on a function given through its logarithm, log f(z).
///
/// Working with log f lets the caller hand in log-determinants: the three samples
/// are rescaled by the newest one each step, which leaves the iterate unchanged and
/// keeps exp() in range. Roots listed in `deflate` are divided out.
template <class LogF>
MullerResult muller_log(LogF&& log_f, cplx x0, cplx x1, cplx x2, double tol, int max_iterations,
                        std::span<const cplx> deflate = {}) {
  auto eval = [&](cplx z) {
    cplx l = log_f(z);
    for (const cplx& r : deflate) l -= std::log(z - r);
    return l;
  };
  cplx l0 = eval(x0), l1 = eval(x1), l2 = eval(x2);
  MullerResult out{x2, 0, false};
  for (int it = 1; it <= max_iterations; ++it) {
    const cplx f0 = std::exp(l0 - l2), f1 = std::exp(l1 - l2), f2 = 1.0;
    const cplx q = (x2 - x1) / (x1 - x0);
    const cplx a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
    const cplx b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
    const cplx c = (1.0 + q) * f2;
    const cplx disc = std::sqrt(b * b - 4.0 * a * c);
    cplx den = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
    cplx x3;
    if (std::abs(den) == 0.0 || !std::isfinite(std::abs(den)))
      x3 = x2 + (x2 - x1);  // flat or degenerate parabola: step on
    else
      x3 = x2 - (x2 - x1) * 2.0 * c / den;
    if (!std::isfinite(x3.real()) || !std::isfinite(x3.imag())) return out;

    out.iterations = it;
    out.root = x3;
    if (std::abs(x3 - x2) < tol) {
      out.converged = true;
      return out;
    }
    x0 = x1;
    x1 = x2;
    x2 = x3;
    l0 = l1;
    l1 = l2;
    l2 = eval(x2);
    if (!std::isfinite(l2.real())) {  // landed exactly on a root
      out.converged = true;
      return out;
    }
  }
  return out;
}

struct GoldenResult {
  double x;
  double fx;
};

/// Golden-section minimization of a unimodal function on [lo, hi] to absolute tolerance tol.
template <class F>
GoldenResult golden_section_minimize(F&& f, double lo, double hi, double tol, int max_iterations = 200) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iterations && (hi - lo) > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
}

}  // namespace microcav
