#pragma once

// Field reconstruction inside the cavity from the boundary data of a resonance:
//
//   psi(x) = int_G [ Phi(x, y) v(y) - dPhi/dnu_y(x, y) u(y) ] ds_y,   Phi = (i/4) H0(k1 |x - y|)
//
// with u = 0 for closed modes. The trapezoid rule on the boundary nodes is accurate
// away from G; closer in, the densities are resampled on a finer node set by
// trigonometric interpolation (error ~ exp(-2 pi d / h)). Within a few thousandths of
// G, where even that would need too many nodes, a second-order expansion in the
// normal direction is used instead.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "microcav/bessel.hpp"
#include "microcav/errors.hpp"
#include "microcav/geometry.hpp"
#include "microcav/helmholtz_bem.hpp"
#include "microcav/mode_field.hpp"

namespace microcav {

class FieldEvaluator {
public:
  static constexpr double kResolution = 2.2;  ///< required (node spacing) / distance ratio
  static constexpr int kMaxRefinement = 64;

  FieldEvaluator(const CavityGeometry& geometry, const Resonance& resonance)
      : g_(geometry), kind_(resonance.kind) {
    const std::size_t m = geometry.size();
    if (resonance.element_count != m)
      throw ConfigError("interior_field: resonance and geometry have different element counts");
    const std::size_t expect = resonance.kind == ResonanceKind::Closed ? m : 2 * m;
    if (resonance.boundary_density.size() != expect)
      throw ConfigError("interior_field: boundary density has the wrong length");
    k1_ = resonance.refractive_index * resonance.k;
    const cplx* d = resonance.boundary_density.data();
    if (kind_ == ResonanceKind::Closed) {
      v_hat_ = fourier(d, m);
    } else {
      u_hat_ = fourier(d, m);
      v_hat_ = fourier(d + m, m);
    }
    for (const auto& e : geometry.elements) h_max_ = std::max(h_max_, e.weight);
  }

  cplx operator()(const Vec2& p) {
    if (!g_.contains(p)) throw DomainError("interior_field: point outside or on the boundary");
    const double t = closest_parameter(g_, p);
    const Vec2 x = g_.point(t);
    const double dist = std::hypot(x[0] - p[0], x[1] - p[1]);
    const double need = kResolution * h_max_ / dist;
    if (need > kMaxRefinement) return taylor(t, dist);
    int f = 1;
    while (f < need) f *= 2;
    return quadrature(p, samples(f));
  }

private:
  struct Sample {
    Vec2 y, nu;
    double w;
    cplx u, v;
  };

  static std::vector<cplx> fourier(const cplx* f, std::size_t m) {
    // c_j for j = -(M/2 - 1) .. M/2 - 1; the Nyquist mode is not sampled at
    // t_j = 2 pi (j + 1/2)/M and is dropped.
    const int half = int(m / 2);
    std::vector<cplx> c(std::size_t(2 * half - 1));
    const double h = 2.0 * std::numbers::pi / double(m);
    for (int q = -half + 1; q < half; ++q) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += f[j] * std::polar(1.0, -q * h * (double(j) + 0.5));
      c[std::size_t(q + half - 1)] = s / double(m);
    }
    return c;
  }

  /// Value and first two t-derivatives of the interpolant.
  static std::array<cplx, 3> interp(const std::vector<cplx>& c, double t) {
    const int half = int(c.size() + 1) / 2;
    std::array<cplx, 3> out{0.0, 0.0, 0.0};
    const cplx i1(0.0, 1.0);
    for (int q = -half + 1; q < half; ++q) {
      const cplx term = c[std::size_t(q + half - 1)] * std::polar(1.0, q * t);
      out[0] += term;
      out[1] += i1 * double(q) * term;
      out[2] -= double(q) * double(q) * term;
    }
    return out;
  }

  const std::vector<Sample>& samples(int f) {
    auto it = cache_.find(f);
    if (it != cache_.end()) return it->second;
    const std::size_t n = g_.size() * std::size_t(f);
    const double h = 2.0 * std::numbers::pi / double(n);
    std::vector<Sample> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = h * (double(j) + 0.5);
      const Vec2 d1 = g_.derivative(t);
      const double sp = norm(d1);
      s[j].y = g_.point(t);
      s[j].nu = {d1[1] / sp, -d1[0] / sp};
      s[j].w = sp * h;
      s[j].v = interp(v_hat_, t)[0];
      s[j].u = kind_ == ResonanceKind::Open ? interp(u_hat_, t)[0] : cplx(0.0);
    }
    return cache_.emplace(f, std::move(s)).first->second;
  }

  cplx quadrature(const Vec2& p, const std::vector<Sample>& s) const {
    const cplx i1(0.0, 1.0);
    cplx acc = 0.0;
    for (const auto& e : s) {
      const Vec2 d{p[0] - e.y[0], p[1] - e.y[1]};
      const double r = norm(d);
      cplx h0, h1;
      special::hankel1_01(k1_ * r, h0, h1);
      cplx term = 0.25 * i1 * h0 * e.v;
      if (kind_ == ResonanceKind::Open)
        term -= 0.25 * i1 * k1_ * h1 * (dot(e.nu, d) / r) * e.u;
      acc += e.w * term;
    }
    return acc;
  }

  cplx taylor(double t, double dist) const {
    const auto v = interp(v_hat_, t);
    const Vec2 d1 = g_.derivative(t), d2 = g_.second_derivative(t);
    const double sp2 = dot(d1, d1);
    const double kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / (sp2 * std::sqrt(sp2));
    std::array<cplx, 3> u{0.0, 0.0, 0.0};
    if (kind_ == ResonanceKind::Open) u = interp(u_hat_, t);
    const cplx u_ss = (u[2] - dot(d1, d2) / sp2 * u[1]) / sp2;
    const cplx psi_nn = -k1_ * k1_ * u[0] - kappa * v[0] - u_ss;
    return u[0] - dist * v[0] + 0.5 * dist * dist * psi_nn;
  }

  const CavityGeometry& g_;
  ResonanceKind kind_;
  cplx k1_;
  std::vector<cplx> u_hat_, v_hat_;
  double h_max_ = 0.0;
  std::map<int, std::vector<Sample>> cache_;
};

/// Field on every mesh cell. With a parity-resolved resonance and a mirrored mesh only
/// the first quadrant is evaluated and the rest filled by symmetry.
inline ModeField interior_field(const Resonance& resonance, const CavityGeometry& geometry,
                                const MeshPtr& mesh) {
  if (!mesh) throw DomainError("interior_field: no mesh");
  for (const auto& c : mesh->centers)
    if (!geometry.contains(c)) throw DomainError("interior_field: mesh point outside or on the boundary");
  FieldEvaluator eval(geometry, resonance);
  const std::size_t n = mesh->size();
  ModeField field{mesh, std::vector<cplx>(n)};
  const bool fold = resonance.symmetry && mesh->has_mirrors();
  if (!fold) {
    for (std::size_t i = 0; i < n; ++i) field.amplitudes[i] = eval(mesh->centers[i]);
    return field;
  }
  const Parity p = *resonance.symmetry;
  std::vector<char> done(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (mesh->centers[i][0] >= 0.0 && mesh->centers[i][1] >= 0.0) {
      field.amplitudes[i] = eval(mesh->centers[i]);
      done[i] = 1;
    }
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    const bool fx = mesh->centers[i][0] < 0.0, fy = mesh->centers[i][1] < 0.0;
    std::size_t src = i;
    double sign = 1.0;
    if (fx && src != kNoMirror) {
      src = mesh->mirror_x[src];
      sign *= p.x;
    }
    if (fy && src != kNoMirror) {
      src = mesh->mirror_y[src];
      sign *= p.y;
    }
    field.amplitudes[i] = (src != kNoMirror && done[src]) ? sign * field.amplitudes[src]
                                                          : eval(mesh->centers[i]);
  }
  return field;
}

}  // namespace microcav
