#pragma once

// Two-level effective non-Hermitian Hamiltonian
//
//   H = [ eta11 + delta11   delta'          ]
//       [ delta'            eta22 + delta22 ]
//
// with real eta, complex delta_jj and a real coupling delta'.

#include <cmath>
#include <complex>
#include <string_view>

#include "microcav/errors.hpp"

namespace microcav {

using cplx = std::complex<double>;

enum class Regime { Strong, Weak, Boundary };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Strong: return "strong";
    case Regime::Weak: return "weak";
    case Regime::Boundary: return "boundary";
  }
  return "?";
}

struct TwoLevelHamiltonian {
  double eta_11 = 0.0;
  double eta_22 = 0.0;
  cplx delta_11{};
  cplx delta_22{};
  double delta_prime = 0.0;

  cplx omega_1() const { return eta_11 + delta_11; }
  cplx omega_2() const { return eta_22 + delta_22; }
};

struct TwoLevelEigenvalues {
  cplx zeta_plus;
  cplx zeta_minus;
  cplx d;
  Regime regime;
};

inline constexpr double kDefaultRegimeTolerance = 1e-9;

/// d^2 = (w1 - w2)^2 / 4 + delta'^2. Vanishes at an exceptional point, and also at
/// the diabolic point delta' = 0, w1 = w2 where H stays diagonalizable.
inline cplx exceptional_point_gap(const TwoLevelHamiltonian& h) {
  const cplx half = 0.5 * (h.omega_1() - h.omega_2());
  return half * half + h.delta_prime * h.delta_prime;
}

/// Strong when 2 delta' exceeds |Im w1 - Im w2| by more than tol, weak when it falls short.
inline Regime classify_regime(const TwoLevelHamiltonian& h,
                              double tol = kDefaultRegimeTolerance) {
  if (!(tol >= 0.0)) throw DomainError("classify_regime: tol must be >= 0");
  const double margin =
      2.0 * h.delta_prime - std::abs(h.omega_1().imag() - h.omega_2().imag());
  if (margin > tol) return Regime::Strong;
  if (margin < -tol) return Regime::Weak;
  return Regime::Boundary;
}

/// zeta_pm = (w1 + w2)/2 +- d with the principal square root; zeta_plus carries +d.
inline TwoLevelEigenvalues eigenvalues(const TwoLevelHamiltonian& h,
                                       double tol = kDefaultRegimeTolerance) {
  const cplx d = std::sqrt(exceptional_point_gap(h));
  const cplx mean = 0.5 * (h.omega_1() + h.omega_2());
  return {mean + d, mean - d, d, classify_regime(h, tol)};
}

}  // namespace microcav
