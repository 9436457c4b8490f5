#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "microcav/errors.hpp"
#include "microcav/geometry.hpp"
#include "microcav/numerics.hpp"

namespace microcav {

using cplx = std::complex<double>;

inline constexpr std::size_t kNoMirror = std::numeric_limits<std::size_t>::max();
inline constexpr int kMinGridPerAxis = 32;
inline constexpr double kInteriorMargin = 1e-6;

/// Cell centers of a uniform grid restricted to the cavity interior.
struct EvaluationMesh {
  double epsilon = 0.0;
  double a = 1.0;
  double b = 1.0;
  int grid_per_axis = 0;  ///< 0 for meshes read back from a dump
  double cell_area = 0.0;
  std::vector<Vec2> centers;
  std::vector<std::size_t> mirror_x;  ///< index of (-x, y), kNoMirror if unknown
  std::vector<std::size_t> mirror_y;  ///< index of (x, -y)
  std::uint64_t fingerprint = 0;

  std::size_t size() const { return centers.size(); }
  bool has_mirrors() const { return !mirror_x.empty(); }
};

using MeshPtr = std::shared_ptr<const EvaluationMesh>;

inline std::uint64_t mesh_fingerprint(const std::vector<Vec2>& centers) {
  Fnv1a h;
  h.integer(centers.size());
  for (const auto& c : centers) {
    h.real(c[0]);
    h.real(c[1]);
  }
  return h.digest();
}

inline bool same_mesh(const MeshPtr& lhs, const MeshPtr& rhs) {
  if (!lhs || !rhs) return false;
  return lhs == rhs || (lhs->size() == rhs->size() && lhs->fingerprint == rhs->fingerprint);
}

inline void require_same_mesh(const MeshPtr& lhs, const MeshPtr& rhs, const char* where) {
  if (!same_mesh(lhs, rhs))
    throw MeshMismatchError(std::string(where) + ": distributions live on different meshes");
}

/// Uniform grid over [-a, a] x [-b, b]; keeps cells whose centers satisfy
/// (x/a)^2 + (y/b)^2 < 1 - 1e-6.
inline MeshPtr build_mesh(const CavityGeometry& geometry, int grid_per_axis) {
  if (grid_per_axis < kMinGridPerAxis)
    throw ConfigError("build_mesh: grid_per_axis must be >= " + std::to_string(kMinGridPerAxis));
  auto mesh = std::make_shared<EvaluationMesh>();
  mesh->epsilon = geometry.epsilon;
  mesh->a = geometry.a;
  mesh->b = geometry.b;
  mesh->grid_per_axis = grid_per_axis;
  const double dx = 2.0 * geometry.a / grid_per_axis;
  const double dy = 2.0 * geometry.b / grid_per_axis;
  mesh->cell_area = dx * dy;

  const auto g = std::size_t(grid_per_axis);
  std::vector<std::size_t> slot(g * g, kNoMirror);
  for (std::size_t j = 0; j < g; ++j) {
    // Mirror-exact coordinates: cell i and G-1-i get opposite centers bit-for-bit.
    const double y = (double(j) - 0.5 * double(g - 1)) * dy;
    for (std::size_t i = 0; i < g; ++i) {
      const double x = (double(i) - 0.5 * double(g - 1)) * dx;
      const Vec2 c{x, y};
      if (!geometry.contains(c, kInteriorMargin)) continue;
      slot[j * g + i] = mesh->centers.size();
      mesh->centers.push_back(c);
    }
  }
  mesh->mirror_x.assign(mesh->size(), kNoMirror);
  mesh->mirror_y.assign(mesh->size(), kNoMirror);
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t s = slot[j * g + i];
      if (s == kNoMirror) continue;
      mesh->mirror_x[s] = slot[j * g + (g - 1 - i)];
      mesh->mirror_y[s] = slot[(g - 1 - j) * g + i];
    }
  mesh->fingerprint = mesh_fingerprint(mesh->centers);
  return mesh;
}

struct ModeField {
  MeshPtr mesh;
  std::vector<cplx> amplitudes;
};

struct ProbabilityGrid {
  MeshPtr mesh;
  std::vector<double> probabilities;

  std::size_t size() const { return probabilities.size(); }
  double operator[](std::size_t i) const { return probabilities[i]; }
};

inline constexpr double kIntensityClamp = 1e-30;

/// P(x_j) = |psi(x_j)|^2 / sum_i |psi(x_i)|^2, with intensities below 1e-30 of the
/// maximum set to zero first.
inline ProbabilityGrid normalize_intensity(const ModeField& field) {
  if (field.mesh && field.amplitudes.size() != field.mesh->size())
    throw DomainError("normalize_intensity: amplitude count differs from mesh size");
  std::vector<double> p(field.amplitudes.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::norm(field.amplitudes[i]);
    peak = std::max(peak, p[i]);
  }
  if (!(peak > 0.0) || !std::isfinite(peak))
    throw DegenerateFieldError("normalize_intensity: field has no nonzero finite amplitude");
  CompensatedSum total;
  for (double& v : p) {
    if (v < kIntensityClamp * peak) v = 0.0;
    total.add(v);
  }
  const double z = total.value();
  for (double& v : p) v /= z;
  return {field.mesh, std::move(p)};
}

// ---------------------------------------------------------------------------
// Text dump: header "N a b epsilon", then N lines "x y re im" (+ " p" for grids).

inline void write_field_dump(std::ostream& out, const ModeField& field,
                             const ProbabilityGrid* probabilities = nullptr) {
  const auto& m = *field.mesh;
  out << m.size() << ' ' << format_double(m.a) << ' ' << format_double(m.b) << ' '
      << format_double(m.epsilon) << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << format_double(m.centers[i][0]) << ' ' << format_double(m.centers[i][1]) << ' '
        << format_double(field.amplitudes[i].real()) << ' '
        << format_double(field.amplitudes[i].imag());
    if (probabilities) out << ' ' << format_double(probabilities->probabilities[i]);
    out << '\n';
  }
}

namespace detail {
inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}
}  // namespace detail

/// Parses a field dump. The mesh is rebuilt from the listed centers.
inline ModeField read_field_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field dump: missing header");
  const auto head = detail::split_ws(line);
  if (head.size() != 4) throw ConfigError("field dump: header must be 'N a b epsilon'");
  const double n_real = parse_double(head[0]);
  if (n_real < 1 || n_real != std::floor(n_real)) throw ConfigError("field dump: bad N");
  const auto n = std::size_t(n_real);

  auto mesh = std::make_shared<EvaluationMesh>();
  mesh->a = parse_double(head[1]);
  mesh->b = parse_double(head[2]);
  mesh->epsilon = parse_double(head[3]);
  ModeField field;
  field.amplitudes.reserve(n);
  mesh->centers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw ConfigError("field dump: expected " + std::to_string(n) + " rows, got " +
                        std::to_string(i));
    const auto cols = detail::split_ws(line);
    if (cols.size() != 4 && cols.size() != 5)
      throw ConfigError("field dump: row " + std::to_string(i + 1) + " needs 4 or 5 columns");
    mesh->centers.push_back({parse_double(cols[0]), parse_double(cols[1])});
    field.amplitudes.emplace_back(parse_double(cols[2]), parse_double(cols[3]));
  }
  mesh->cell_area = (mesh->a * mesh->b * 3.141592653589793) / double(n);
  mesh->fingerprint = mesh_fingerprint(mesh->centers);
  field.mesh = std::move(mesh);
  return field;
}

inline ModeField read_field_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field dump '" + path + "'");
  return read_field_dump(in);
}

}  // namespace microcav
