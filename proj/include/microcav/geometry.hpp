#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "microcav/errors.hpp"

namespace microcav {

using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

struct EllipseAxes {
  double a;  ///< semi-major axis, 1 + epsilon
  double b;  ///< semi-minor axis, 1 / (1 + epsilon)
};

/// Area-preserving ellipse family: a = 1 + eps, b = 1 / (1 + eps), so pi a b = pi.
inline EllipseAxes ellipse_axes(double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("ellipse_axes: epsilon must be >= 0");
  return {1.0 + epsilon, 1.0 / (1.0 + epsilon)};
}

/// One boundary node. The parameter t is the elliptic angle, x = a cos t, y = b sin t.
struct BoundaryElement {
  double t;
  Vec2 midpoint;
  Vec2 normal;     ///< unit, outward
  double weight;   ///< arclength carried by the node, |x'(t)| * 2 pi / M
  double speed;    ///< |x'(t)|
  Vec2 tangent;    ///< x'(t), not normalized
  Vec2 second;     ///< x''(t)
  double curvature;
};

struct CavityGeometry {
  double epsilon = 0.0;
  double a = 1.0;
  double b = 1.0;
  std::vector<BoundaryElement> elements;

  std::size_t size() const { return elements.size(); }
  double parameter_step() const { return 2.0 * std::numbers::pi / double(elements.size()); }

  double total_weight() const {
    double s = 0.0, c = 0.0;  // Neumaier
    for (const auto& e : elements) {
      const double y = e.weight;
      const double t = s + y;
      c += std::abs(s) >= std::abs(y) ? (s - t) + y : (y - t) + s;
      s = t;
    }
    return s + c;
  }

  Vec2 point(double t) const { return {a * std::cos(t), b * std::sin(t)}; }
  Vec2 derivative(double t) const { return {-a * std::sin(t), b * std::cos(t)}; }
  Vec2 second_derivative(double t) const { return {-a * std::cos(t), -b * std::sin(t)}; }

  /// Strictly inside with the given margin on the implicit function.
  bool contains(const Vec2& p, double margin = 0.0) const {
    const double u = p[0] / a, v = p[1] / b;
    return u * u + v * v < 1.0 - margin;
  }
};

inline constexpr std::size_t kMinElements = 16;

/// Uniform-in-t midpoint sampling, counterclockwise: t_j = 2 pi (j + 1/2) / M.
inline CavityGeometry discretize_boundary(double epsilon, std::size_t element_count) {
  if (element_count < kMinElements)
    throw ConfigError("discretize_boundary: element_count must be >= " +
                      std::to_string(kMinElements));
  const auto axes = ellipse_axes(epsilon);
  CavityGeometry g;
  g.epsilon = epsilon;
  g.a = axes.a;
  g.b = axes.b;
  g.elements.reserve(element_count);
  const double h = 2.0 * std::numbers::pi / double(element_count);
  for (std::size_t j = 0; j < element_count; ++j) {
    BoundaryElement e;
    e.t = h * (double(j) + 0.5);
    e.midpoint = g.point(e.t);
    e.tangent = g.derivative(e.t);
    e.second = g.second_derivative(e.t);
    e.speed = norm(e.tangent);
    e.normal = {e.tangent[1] / e.speed, -e.tangent[0] / e.speed};
    e.weight = e.speed * h;
    e.curvature = (e.tangent[0] * e.second[1] - e.tangent[1] * e.second[0]) /
                  (e.speed * e.speed * e.speed);
    g.elements.push_back(e);
  }
  return g;
}

/// Closest boundary parameter to an interior point, by Newton on (x(t) - p) . x'(t) = 0
/// started from the nearest of a coarse set of samples (the elliptic angle of p alone can
/// sit on the far-side critical point, e.g. on the axes).
inline double closest_parameter(const CavityGeometry& g, const Vec2& p) {
  double t = std::atan2(p[1] / g.b, p[0] / g.a);
  auto dist2 = [&](double s) {
    const Vec2 x = g.point(s);
    return (x[0] - p[0]) * (x[0] - p[0]) + (x[1] - p[1]) * (x[1] - p[1]);
  };
  double best = dist2(t);
  for (int i = 0; i < 64; ++i) {
    const double s = 2.0 * std::numbers::pi * i / 64.0;
    if (const double d = dist2(s); d < best) {
      best = d;
      t = s;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const Vec2 x = g.point(t), d1 = g.derivative(t), d2 = g.second_derivative(t);
    const Vec2 r = {x[0] - p[0], x[1] - p[1]};
    const double f = dot(r, d1);
    const double fp = dot(d1, d1) + dot(r, d2);
    const double step = f / (fp > 1e-12 ? fp : 1e-12);
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return t;
}

inline double distance_to_boundary(const CavityGeometry& g, const Vec2& p) {
  const Vec2 x = g.point(closest_parameter(g, p));
  return std::hypot(x[0] - p[0], x[1] - p[1]);
}

}  // namespace microcav
