#pragma once

// Closed (Dirichlet) and open (TM dielectric) eigenproblems of the cavity.
//
// Closed: single-layer equation S(nk) v = 0 for v = d psi / dn on the boundary; the
// reported lambda is the real k, so that n k is the Dirichlet wavenumber.
//
// Open: with u = psi|G and v = d psi/dn|G (continuous across G for TM), Green's
// representations inside (wavenumber k1 = n k) and outside (k2 = k, outgoing) give the
// second-kind system
//
//   [ I + K(k1) - K(k2)    S(k2) - S(k1)      ] [u]   [0]
//   [ T(k1) - T(k2)        I + K'(k2) - K'(k1)] [v] = [0].
//
// When the config fixes a parity class, the columns are folded over the mirror images
// and only first-quadrant rows are kept (an exact reduction, M/4 unknowns per density).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "microcav/errors.hpp"
#include "microcav/geometry.hpp"
#include "microcav/layer_operators.hpp"
#include "microcav/numerics.hpp"
#include "microcav/roots.hpp"

namespace microcav {

enum class ResonanceKind { Closed, Open };

inline std::string_view to_string(ResonanceKind k) {
  return k == ResonanceKind::Closed ? "closed" : "open";
}

inline std::string to_string(Parity p) {
  return std::string(p.x > 0 ? "e" : "o") + (p.y > 0 ? "e" : "o");
}

inline Parity parse_parity(std::string_view s) {
  if (s.size() != 2 || (s[0] != 'e' && s[0] != 'o') || (s[1] != 'e' && s[1] != 'o'))
    throw ConfigError("parity must be one of ee, eo, oe, oo");
  return {s[0] == 'e' ? 1 : -1, s[1] == 'e' ? 1 : -1};
}

/// Real interval x imaginary interval of the complex k plane.
struct ComplexWindow {
  double re_min = 8.5;
  double re_max = 9.8;
  double im_min = -0.3;
  double im_max = 0.0;
};

struct SolverConfig {
  double refractive_index = 2.825;
  std::size_t element_count = 128;
  ComplexWindow k_window{};
  double scan_density = 40.0;       ///< seeds per unit Re k
  double imag_scan_density = 10.0;  ///< seeds per unit Im k
  double root_tol = 1e-10;
  int max_iterations = 60;
  double max_decay = 1.0;            ///< open windows must lie in [-max_decay, 0]
  double residual_threshold = 1e-6;  ///< accept when sigma_min / sigma_max is below this
  std::optional<Parity> symmetry = Parity{1, 1};

  void validate() const {
    if (!(refractive_index > 1.0)) throw ConfigError("refractive index must exceed 1");
    if (element_count < kMinElements)
      throw ConfigError("element_count must be >= " + std::to_string(kMinElements));
    if (element_count % 2 != 0) throw ConfigError("element_count must be even");
    if (symmetry && element_count % 4 != 0)
      throw ConfigError("element_count must be a multiple of 4 when a parity class is fixed");
    if (!(root_tol > 0.0)) throw ConfigError("root_tol must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (!(scan_density > 0.0) || !(imag_scan_density > 0.0))
      throw ConfigError("scan densities must be positive");
    if (!(residual_threshold > 0.0)) throw ConfigError("residual_threshold must be positive");
    const auto& w = k_window;
    if (!(w.re_min > 0.0)) throw ConfigError("k window must lie in Re k > 0");
    if (!(w.re_min <= w.re_max) || !(w.im_min <= w.im_max))
      throw ConfigError("k window bounds are inverted");
  }
};

struct Resonance {
  cplx k;
  ResonanceKind kind = ResonanceKind::Open;
  double residual = 0.0;  ///< sigma_min / sigma_max of the characteristic matrix at k
  /// Closed: v on all M nodes. Open: u followed by v (2M entries).
  std::vector<cplx> boundary_density;
  std::optional<Parity> symmetry;
  double epsilon = 0.0;
  double refractive_index = 1.0;
  std::size_t element_count = 0;
};

/// Per-seed failures of a search, kept instead of printed.
struct SearchDiagnostics {
  std::size_t seeds = 0;
  std::size_t failed_seeds = 0;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::size_t> all_rows(std::size_t m) {
  std::vector<std::size_t> r(m);
  for (std::size_t i = 0; i < m; ++i) r[i] = i;
  return r;
}

inline std::vector<std::size_t> quadrant_rows(std::size_t m) { return all_rows(m / 4); }

inline void check_k(cplx k) {
  if (k == cplx(0.0, 0.0) || !std::isfinite(k.real()) || !std::isfinite(k.imag()))
    throw DomainError("characteristic matrix: k must be finite and nonzero");
}

/// Builds the matrix on the given rows; `fold` is applied to every full-column block.
template <class Fold>
CMatrix assemble(const CavityGeometry& g, double n, cplx k, ResonanceKind kind,
                 const std::vector<std::size_t>& rows, Fold&& fold) {
  check_k(k);
  const auto kress = kress_weights(g.size());
  if (kind == ResonanceKind::Closed) {
    return fold(assemble_layers(g, n * k, rows, kSingle, kress).S);
  }
  const unsigned all = kSingle | kDouble | kAdjointDouble | kHypersingular;
  const auto in = assemble_layers(g, n * k, rows, all, kress);
  const auto out = assemble_layers(g, k, rows, all, kress);
  const CMatrix a11 = fold(CMatrix(in.K - out.K));
  const CMatrix a12 = fold(CMatrix(out.S - in.S));
  const CMatrix a21 = fold(CMatrix(in.T - out.T));
  const CMatrix a22 = fold(CMatrix(out.Kp - in.Kp));
  const auto nr = a11.rows(), nc = a11.cols();
  CMatrix a(2 * nr, 2 * nc);
  a.topLeftCorner(nr, nc) = a11;
  a.topRightCorner(nr, nc) = a12;
  a.bottomLeftCorner(nr, nc) = a21;
  a.bottomRightCorner(nr, nc) = a22;
  for (Eigen::Index r = 0; r < nr; ++r) {
    // Row r is node rows[r]; in both the full and the folded layout column rows[r]
    // (resp. r) carries that node.
    a(r, r) += 1.0;
    a(nr + r, nc + r) += 1.0;
  }
  return a;
}

}  // namespace detail

/// Full matrix: M x M (Closed) or 2M x 2M (Open), unknowns in node order.
inline CMatrix characteristic_matrix(const CavityGeometry& g, const SolverConfig& config, cplx k,
                                     ResonanceKind kind) {
  return detail::assemble(g, config.refractive_index, k, kind, detail::all_rows(g.size()),
                          [](CMatrix m) { return m; });
}

/// Matrix restricted to one parity class: (M/4) or 2(M/4) square.
inline CMatrix reduced_characteristic_matrix(const CavityGeometry& g, const SolverConfig& config,
                                             cplx k, ResonanceKind kind, Parity p) {
  const auto mm = mirror_maps(g.size());
  return detail::assemble(g, config.refractive_index, k, kind, detail::quadrant_rows(g.size()),
                          [&](const CMatrix& m) { return reduce_columns(m, mm, p); });
}

/// Matrix the searches work with: reduced when config.symmetry is set.
inline CMatrix working_matrix(const CavityGeometry& g, const SolverConfig& config, cplx k,
                              ResonanceKind kind) {
  if (config.symmetry) return reduced_characteristic_matrix(g, config, k, kind, *config.symmetry);
  return characteristic_matrix(g, config, k, kind);
}

/// sigma_min / sigma_max.
inline double relative_smallest_singular_value(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

/// log det A by LU, as a complex number (the imaginary part is defined mod 2 pi).
inline cplx log_determinant(const CMatrix& a) {
  Eigen::PartialPivLU<CMatrix> lu(a);
  const CMatrix& m = lu.matrixLU();
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(m(i, i));
  if (lu.permutationP().determinant() < 0) s += cplx(0.0, std::numbers::pi);
  return s;
}

namespace detail {

inline std::vector<cplx> normalized_density(const CVector& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx phase = std::abs(v(imax)) > 0 ? std::conj(v(imax)) / std::abs(v(imax)) : 1.0;
  const double nrm = v.norm();
  std::vector<cplx> out(std::size_t(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[std::size_t(i)] = v(i) * phase / nrm;
  return out;
}

inline CVector expand_density(const CavityGeometry& g, const CVector& w, ResonanceKind kind,
                              const std::optional<Parity>& sym) {
  if (!sym) return w;
  const auto mm = mirror_maps(g.size());
  const Eigen::Index q = Eigen::Index(g.size() / 4);
  const Eigen::Index m = Eigen::Index(g.size());
  if (kind == ResonanceKind::Closed) return expand_parity(w, mm, *sym);
  CVector out(2 * m);
  out.head(m) = expand_parity(w.head(q), mm, *sym);
  out.tail(m) = expand_parity(w.tail(q), mm, *sym);
  return out;
}

}  // namespace detail

/// Resonance record at a converged k: residual and the right singular vector of the
/// smallest singular value, expanded to all nodes.
inline Resonance make_resonance(const CavityGeometry& g, const SolverConfig& config, cplx k,
                                ResonanceKind kind, int singular_index = 0) {
  if (kind == ResonanceKind::Closed) k = cplx(k.real(), 0.0);
  const CMatrix a = working_matrix(g, config, k, kind);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const Eigen::Index col = s.size() - 1 - singular_index;
  Resonance r;
  r.k = k;
  r.kind = kind;
  r.residual = s(col) / s(0);
  r.boundary_density =
      detail::normalized_density(detail::expand_density(g, svd.matrixV().col(col), kind, config.symmetry));
  r.symmetry = config.symmetry;
  r.epsilon = g.epsilon;
  r.refractive_index = config.refractive_index;
  r.element_count = g.size();
  return r;
}

// ---------------------------------------------------------------------------
// Closed eigenvalues

/// Polished real roots of sigma_min(S(n k)) in [lo, hi], scanned with step `step`.
inline std::vector<double> closed_roots_in(const CavityGeometry& g, const SolverConfig& config,
                                           double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw ConfigError("closed scan: bad interval or step");
  auto sigma = [&](double k) {
    return relative_smallest_singular_value(working_matrix(g, config, k, ResonanceKind::Closed));
  };
  const double start = std::max(lo - step, 1e-3);
  const auto count = std::size_t(std::ceil((hi + step - start) / step)) + 1;
  std::vector<double> ks(count), fs(count);
  for (std::size_t i = 0; i < count; ++i) {
    ks[i] = start + step * double(i);
    fs[i] = sigma(ks[i]);
  }
  std::vector<double> roots;
  for (std::size_t i = 1; i + 1 < count; ++i) {
    if (!(fs[i] < fs[i - 1] && fs[i] <= fs[i + 1])) continue;
    auto best = golden_section_minimize(sigma, ks[i - 1], ks[i + 1], 1e-3 * step);
    // sigma_min is only V-shaped at the root, so the golden estimate is polished by
    // Muller on the determinant; kept if it stays in the bracket.
    auto logdet = [&](cplx k) {
      return log_determinant(working_matrix(g, config, k, ResonanceKind::Closed));
    };
    const double spread = 0.25 * step;
    const auto m = muller_log(logdet, best.x - spread, best.x + spread, cplx(best.x, 0.5 * spread),
                              config.root_tol, config.max_iterations);
    if (m.converged && m.root.real() > ks[i - 1] && m.root.real() < ks[i + 1]) {
      const double f = sigma(m.root.real());
      if (f < best.fx) best = {m.root.real(), f};
    } else {
      const double w = 2e-3 * step;
      best = golden_section_minimize(sigma, best.x - w, best.x + w, config.root_tol);
    }
    if (best.fx > config.residual_threshold) continue;
    if (best.x >= lo && best.x <= hi) roots.push_back(best.x);
    // A second level closer than the scan step shares the bracket; divide the first out.
    const cplx known[] = {cplx(best.x, 0.0)};
    const auto d = muller_log(logdet, best.x - spread, best.x + spread, cplx(best.x, 0.5 * spread),
                              config.root_tol, config.max_iterations, known);
    const double x2 = d.root.real();
    if (d.converged && x2 > ks[i - 1] && x2 < ks[i + 1] && std::abs(x2 - best.x) > 10.0 * config.root_tol &&
        x2 >= lo && x2 <= hi && sigma(x2) <= config.residual_threshold)
      roots.push_back(x2);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 10.0 * config.root_tol) out.push_back(r);
  return out;
}

/// All closed eigenvalues with Re k in the window, ascending. Without a fixed parity,
/// a second singular direction below threshold is reported as a separate record.
inline std::vector<Resonance> find_closed_eigenvalues(const CavityGeometry& g,
                                                      const SolverConfig& config) {
  config.validate();
  if (config.k_window.im_min > 0.0 || config.k_window.im_max < 0.0)
    throw ConfigError("find_closed_eigenvalues: imaginary window must contain 0");
  std::vector<Resonance> out;
  // Closed levels cross freely, so the scan is four times finer than the open seed grid.
  for (double k : closed_roots_in(g, config, config.k_window.re_min, config.k_window.re_max,
                                  0.25 / config.scan_density)) {
    out.push_back(make_resonance(g, config, k, ResonanceKind::Closed));
    if (!config.symmetry) {
      auto second = make_resonance(g, config, k, ResonanceKind::Closed, 1);
      if (second.residual < config.residual_threshold) out.push_back(std::move(second));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Open resonances

/// Muller on log det of the working matrix from a seed, dividing out `deflate`.
/// Closed roots come back with the (round-off) imaginary part dropped.
inline MullerResult refine_root(const CavityGeometry& g, const SolverConfig& config,
                                ResonanceKind kind, cplx seed, double spread,
                                std::span<const cplx> deflate = {}) {
  auto logdet = [&](cplx k) { return log_determinant(working_matrix(g, config, k, kind)); };
  const cplx i1(0.0, 1.0);
  auto r = muller_log(logdet, seed - spread, seed + spread, seed + 0.5 * i1 * spread,
                      config.root_tol, config.max_iterations, deflate);
  if (kind == ResonanceKind::Closed) r.root = cplx(r.root.real(), 0.0);
  return r;
}

inline MullerResult refine_open_root(const CavityGeometry& g, const SolverConfig& config, cplx seed,
                                     double spread, std::span<const cplx> deflate = {}) {
  return refine_root(g, config, ResonanceKind::Open, seed, spread, deflate);
}

inline bool in_window(const ComplexWindow& w, cplx k, double slack = 0.0) {
  return k.real() >= w.re_min - slack && k.real() <= w.re_max + slack &&
         k.imag() >= w.im_min - slack && k.imag() <= w.im_max + slack;
}

/// Seeds on a grid over the window, Muller-polished and deduplicated; sorted by Re k.
inline std::vector<Resonance> find_open_resonances(const CavityGeometry& g,
                                                   const SolverConfig& config,
                                                   SearchDiagnostics* diagnostics = nullptr) {
  config.validate();
  const auto& w = config.k_window;
  if (w.im_max > 0.0 || w.im_min < -config.max_decay)
    throw ConfigError("find_open_resonances: imaginary window must lie in [-max_decay, 0]");
  const double dre = 1.0 / config.scan_density, dim = 1.0 / config.imag_scan_density;
  const auto nre = std::size_t(std::floor((w.re_max - w.re_min) / dre + 1e-9)) + 1;
  const auto nim = std::size_t(std::floor((w.im_max - w.im_min) / dim + 1e-9)) + 1;

  SearchDiagnostics local;
  std::vector<cplx> roots;
  for (std::size_t a = 0; a < nim; ++a)
    for (std::size_t b = 0; b < nre; ++b) {
      const cplx seed(w.re_min + dre * double(b), w.im_max - dim * double(a));
      ++local.seeds;
      const auto res = refine_open_root(g, config, seed, 0.25 * dre);
      if (!res.converged) {
        ++local.failed_seeds;
        local.warnings.push_back("seed " + format_double(seed.real()) + format_double(seed.imag()) +
                                 "i: no convergence after " + std::to_string(res.iterations) +
                                 " iterations");
        continue;
      }
      if (!in_window(w, res.root) || !(res.root.imag() < 0.0)) continue;
      roots.push_back(res.root);
    }
  if (local.failed_seeds == local.seeds && local.seeds > 0)
    local.warnings.push_back("all seeds failed to converge");

  std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  std::vector<Resonance> out;
  std::vector<cplx> kept;
  for (cplx r : roots) {
    bool dup = false;
    for (cplx q : kept) dup = dup || std::abs(q - r) < 10.0 * config.root_tol + 1e-9;
    if (dup) continue;
    auto res = make_resonance(g, config, r, ResonanceKind::Open);
    if (res.residual > config.residual_threshold) {
      local.warnings.push_back("root " + format_double(r.real()) + " rejected: residual " +
                               format_double(res.residual));
      continue;
    }
    kept.push_back(r);
    out.push_back(std::move(res));
  }
  if (diagnostics) *diagnostics = std::move(local);
  return out;
}

}  // namespace microcav
