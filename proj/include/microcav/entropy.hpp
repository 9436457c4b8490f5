#pragma once

// Relative entropy, Shannon entropies and the Lamb shift. Natural logarithms throughout.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "microcav/errors.hpp"
#include "microcav/mode_field.hpp"
#include "microcav/numerics.hpp"

namespace microcav {

inline constexpr double kDefaultFloorFraction = 1e-9;

/// D_KL(P || Q) = sum_j P_j log(P_j / Q_j), with 0 log(0/q) = 0.
/// Throws InfiniteDivergenceError at the first cell with P_j > 0 and Q_j = 0.
inline double kl_divergence(const ProbabilityGrid& p, const ProbabilityGrid& q) {
  require_same_mesh(p.mesh, q.mesh, "kl_divergence");
  if (p.size() != q.size()) throw MeshMismatchError("kl_divergence: size mismatch");
  CompensatedSum s;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    if (pj == 0.0) continue;
    const double qj = q[j];
    if (qj == 0.0)
      throw InfiniteDivergenceError(
          j, "kl_divergence: P > 0 where Q = 0 at cell " + std::to_string(j));
    s.add(pj * std::log(pj / qj));
  }
  return s.value();
}

/// Q -> (1 - f) Q + f / N, renormalized.
inline ProbabilityGrid apply_floor(const ProbabilityGrid& q, double floor_fraction) {
  if (!(floor_fraction >= 0.0 && floor_fraction < 1.0))
    throw DomainError("apply_floor: floor fraction must lie in [0, 1)");
  const double n = double(q.size());
  std::vector<double> out(q.size());
  CompensatedSum total;
  for (std::size_t j = 0; j < q.size(); ++j) {
    out[j] = (1.0 - floor_fraction) * q[j] + floor_fraction / n;
    total.add(out[j]);
  }
  const double z = total.value();
  for (double& v : out) v /= z;
  return {q.mesh, std::move(out)};
}

/// Relative entropy with the reference floored by `floor_fraction` (f = 0 means no floor).
inline double kl_divergence_floored(const ProbabilityGrid& p, const ProbabilityGrid& q,
                                    double floor_fraction) {
  if (floor_fraction == 0.0) return kl_divergence(p, q);
  return kl_divergence(p, apply_floor(q, floor_fraction));
}

/// E(P) = -sum_j P_j log P_j, with 0 log 0 = 0.
inline double shannon_entropy(const ProbabilityGrid& p) {
  CompensatedSum s;
  for (double pj : p.probabilities)
    if (pj > 0.0) s.add(-pj * std::log(pj));
  return s.value();
}

/// Delta E(P:Q) = E(P) - E(Q); may be negative.
inline double entropy_difference(const ProbabilityGrid& p, const ProbabilityGrid& q) {
  require_same_mesh(p.mesh, q.mesh, "entropy_difference");
  return shannon_entropy(p) - shannon_entropy(q);
}

/// L = lambda - Re zeta.
inline double lamb_shift(double lambda_closed, std::complex<double> zeta_open) {
  return lambda_closed - zeta_open.real();
}

struct EntropyReport {
  double epsilon = 0.0;
  int level = 0;
  double d_kl = 0.0;       ///< nats
  double e_open = 0.0;     ///< E_NH(P)
  double e_closed = 0.0;   ///< E_S(Q)
  double delta_e = 0.0;    ///< e_open - e_closed
  double lamb_shift = 0.0;
  double lambda = 0.0;
  std::complex<double> zeta{};
};

/// Report for one level: P from the open field, Q from the closed one.
inline EntropyReport make_entropy_report(const ProbabilityGrid& open, const ProbabilityGrid& closed,
                                         double lambda_closed, std::complex<double> zeta_open,
                                         double epsilon, int level,
                                         double floor_fraction = 0.0) {
  require_same_mesh(open.mesh, closed.mesh, "make_entropy_report");
  EntropyReport r;
  r.epsilon = epsilon;
  r.level = level;
  r.d_kl = kl_divergence_floored(open, closed, floor_fraction);
  r.e_open = shannon_entropy(open);
  r.e_closed = shannon_entropy(closed);
  r.delta_e = r.e_open - r.e_closed;
  r.lamb_shift = lamb_shift(lambda_closed, zeta_open);
  r.lambda = lambda_closed;
  r.zeta = zeta_open;
  return r;
}

inline constexpr const char* kEntropyCsvHeader =
    "epsilon,level,regime,d_kl,e_open,e_closed,delta_e,lamb_shift,lambda,re_zeta,im_zeta";

inline std::string entropy_csv_row(const EntropyReport& r, std::string_view regime) {
  std::string s;
  s += format_double(r.epsilon) + ',' + std::to_string(r.level) + ',' + std::string(regime) +
       ',' + format_double(r.d_kl) + ',' + format_double(r.e_open) + ',' +
       format_double(r.e_closed) + ',' + format_double(r.delta_e) + ',' +
       format_double(r.lamb_shift) + ',' + format_double(r.lambda) + ',' +
       format_double(r.zeta.real()) + ',' + format_double(r.zeta.imag());
  return s;
}

}  // namespace microcav
