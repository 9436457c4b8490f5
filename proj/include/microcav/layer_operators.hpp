#pragma once

// Nystrom discretization of the 2D Helmholtz layer operators on the ellipse.
//
// Kernels with a logarithmic singularity are split as
//   K(t, s) = K1(t, s) log(4 sin^2((t - s)/2)) + K2(t, s)
// and the log part is integrated exactly against the trigonometric interpolant
// (Kress weights R_j); the smooth part uses the trapezoid rule. On the periodic
// analytic boundary this converges spectrally.
//
// Every kernel below already contains the speed |x'(s)|, so the unknowns are plain
// nodal values of the density.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "microcav/bessel.hpp"
#include "microcav/errors.hpp"
#include "microcav/geometry.hpp"

namespace microcav {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// R_d for node offset d = i - j (mod M), M even.
inline std::vector<double> kress_weights(std::size_t m_nodes) {
  if (m_nodes % 2 != 0) throw ConfigError("kress_weights: node count must be even");
  const std::size_t n = m_nodes / 2;
  const double pi = std::numbers::pi;
  const double h = 2.0 * pi / double(m_nodes);
  std::vector<double> r(m_nodes);
  for (std::size_t d = 0; d < m_nodes; ++d) {
    const double t = h * double(d);
    double s = 0.0;
    for (std::size_t m = 1; m < n; ++m) s += std::cos(double(m) * t) / double(m);
    r[d] = -(2.0 * pi / double(n)) * s - (pi / double(n * n)) * std::cos(double(n) * t);
  }
  return r;
}

/// Parity of a field under x -> -x and y -> -y (+1 even, -1 odd).
struct Parity {
  int x = 1;
  int y = 1;
  friend bool operator==(const Parity&, const Parity&) = default;
};

/// Node permutations of the mirror images; exact for t_j = 2 pi (j + 1/2) / M, M % 4 == 0.
struct MirrorMaps {
  std::vector<std::size_t> x;   ///< node of (-x, y)
  std::vector<std::size_t> y;   ///< node of (x, -y)
  std::vector<std::size_t> xy;  ///< node of (-x, -y)
};

inline MirrorMaps mirror_maps(std::size_t m_nodes) {
  if (m_nodes % 4 != 0) throw ConfigError("mirror_maps: node count must be a multiple of 4");
  MirrorMaps mm;
  mm.x.resize(m_nodes);
  mm.y.resize(m_nodes);
  mm.xy.resize(m_nodes);
  const std::size_t half = m_nodes / 2;
  for (std::size_t j = 0; j < m_nodes; ++j) {
    mm.x[j] = (half + m_nodes - 1 - j) % m_nodes;  // t -> pi - t
    mm.y[j] = m_nodes - 1 - j;                     // t -> -t
    mm.xy[j] = (j + half) % m_nodes;               // t -> t + pi
  }
  return mm;
}

/// Which blocks a caller needs.
enum LayerMask : unsigned {
  kSingle = 1u,
  kDouble = 2u,
  kAdjointDouble = 4u,
  kHypersingular = 8u,
};

/// Rows restricted to `rows`, all M columns.
/// The hypersingular block is regularized by dropping its k-independent part, so it is
/// only meaningful inside a difference T(k1) - T(k2).
struct LayerBlocks {
  CMatrix S, K, Kp, T;
};

namespace detail {

struct NodeGeometry {
  Vec2 x, nu;
  double sp;
  double curvature;
};

inline NodeGeometry node(const BoundaryElement& e) {
  return {e.midpoint, e.normal, e.speed, e.curvature};
}

}  // namespace detail

/// Assembles the requested layer operators at wavenumber k (Im k >= 0 is not required).
inline LayerBlocks assemble_layers(const CavityGeometry& g, cplx k, const std::vector<std::size_t>& rows,
                                   unsigned mask, const std::vector<double>& kress) {
  if (k == cplx(0.0, 0.0)) throw DomainError("assemble_layers: k must be nonzero");
  const std::size_t m = g.size();
  const std::size_t nr = rows.size();
  const double pi = std::numbers::pi;
  const double gamma = std::numbers::egamma;
  const double h = g.parameter_step();
  const cplx i1(0.0, 1.0);
  const cplx k2 = k * k;

  LayerBlocks out;
  if (mask & kSingle) out.S.resize(nr, m);
  if (mask & kDouble) out.K.resize(nr, m);
  if (mask & kAdjointDouble) out.Kp.resize(nr, m);
  if (mask & kHypersingular) out.T.resize(nr, m);

  for (std::size_t a = 0; a < nr; ++a) {
    const std::size_t i = rows[a];
    const auto xi = detail::node(g.elements[i]);
    for (std::size_t j = 0; j < m; ++j) {
      const auto yj = detail::node(g.elements[j]);
      const double sp = yj.sp;
      const double rw = kress[(i + m - j) % m];
      if (i == j) {
        const cplx logk = std::log(k * sp / 2.0);
        if (mask & kSingle) {
          const double s_log = -sp / (4.0 * pi);
          const cplx s_reg = (i1 / 4.0 - gamma / (2.0 * pi) - logk / (2.0 * pi)) * sp;
          out.S(a, j) = rw * s_log + h * s_reg;
        }
        // c = (x2' x1'' - x1' x2'') / (4 pi sp^2) = -kappa sp / (4 pi)
        const double kdiag = -xi.curvature * sp / (4.0 * pi);
        if (mask & kDouble) out.K(a, j) = h * kdiag;
        if (mask & kAdjointDouble) out.Kp(a, j) = h * kdiag;
        if (mask & kHypersingular) {
          const cplx t_log = -k2 * sp / (8.0 * pi);
          const cplx t_reg = (i1 * k2 / 8.0 - (k2 / (4.0 * pi)) * logk +
                              k2 * (1.0 - 2.0 * gamma) / (8.0 * pi)) * sp;
          out.T(a, j) = rw * t_log + h * t_reg;
        }
        continue;
      }
      const Vec2 d{xi.x[0] - yj.x[0], xi.x[1] - yj.x[1]};
      const double r = norm(d);
      const double nyd = dot(yj.nu, d) / r;  // (nu_y . d) / r
      const double nxd = dot(xi.nu, d) / r;
      const double nxny = dot(xi.nu, yj.nu);
      const double sn = std::sin(0.5 * h * double(int(i) - int(j)));
      const double lg = std::log(4.0 * sn * sn);
      const auto f = special::cylinder_functions(k * r);
      const cplx h0 = f.h0(), h1 = f.h1();

      if (mask & kSingle) {
        const cplx full = i1 / 4.0 * h0 * sp;
        const cplx lpart = -f.j0 * sp / (4.0 * pi);
        out.S(a, j) = rw * lpart + h * (full - lpart * lg);
      }
      if (mask & kDouble) {
        const cplx full = i1 * k / 4.0 * h1 * nyd * sp;
        const cplx lpart = -k / (4.0 * pi) * f.j1 * nyd * sp;
        out.K(a, j) = rw * lpart + h * (full - lpart * lg);
      }
      if (mask & kAdjointDouble) {
        const cplx full = -i1 * k / 4.0 * h1 * nxd * sp;
        const cplx lpart = k / (4.0 * pi) * f.j1 * nxd * sp;
        out.Kp(a, j) = rw * lpart + h * (full - lpart * lg);
      }
      if (mask & kHypersingular) {
        const cplx full = i1 * k / 4.0 * (h1 / r * nxny + (k * h0 - 2.0 * h1 / r) * nxd * nyd) * sp;
        const cplx lpart =
            -k / (4.0 * pi) * (f.j1 / r * nxny + (k * f.j0 - 2.0 * f.j1 / r) * nxd * nyd) * sp;
        out.T(a, j) = rw * lpart + h * (full - lpart * lg);
      }
    }
  }
  return out;
}

/// Sums the columns of a full-column block over the mirror images of the first quadrant:
/// B[:, q] = A[:, q] + px A[:, X q] + py A[:, Y q] + px py A[:, XY q], q < M/4.
inline CMatrix reduce_columns(const CMatrix& a, const MirrorMaps& mm, Parity p) {
  const std::size_t quarter = mm.x.size() / 4;
  CMatrix out(a.rows(), Eigen::Index(quarter));
  for (std::size_t q = 0; q < quarter; ++q)
    out.col(Eigen::Index(q)) = a.col(Eigen::Index(q)) + double(p.x) * a.col(Eigen::Index(mm.x[q])) +
                               double(p.y) * a.col(Eigen::Index(mm.y[q])) +
                               double(p.x * p.y) * a.col(Eigen::Index(mm.xy[q]));
  return out;
}

/// Expands a first-quadrant nodal vector to all M nodes with the given parity.
inline CVector expand_parity(const CVector& quarter_values, const MirrorMaps& mm, Parity p) {
  const std::size_t m = mm.x.size();
  const std::size_t quarter = m / 4;
  CVector out(static_cast<Eigen::Index>(m));
  for (std::size_t q = 0; q < quarter; ++q) {
    const cplx v = quarter_values(Eigen::Index(q));
    out(Eigen::Index(q)) = v;
    out(Eigen::Index(mm.x[q])) = double(p.x) * v;
    out(Eigen::Index(mm.y[q])) = double(p.y) * v;
    out(Eigen::Index(mm.xy[q])) = double(p.x * p.y) * v;
  }
  return out;
}

}  // namespace microcav
