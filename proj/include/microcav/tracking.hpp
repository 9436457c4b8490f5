#pragma once

// Deformation sweeps: continuation of two closed and two open levels in epsilon,
// overlap-based level assignment, and the trajectory analyses built on top.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "microcav/circle_modes.hpp"
#include "microcav/entropy.hpp"
#include "microcav/errors.hpp"
#include "microcav/geometry.hpp"
#include "microcav/helmholtz_bem.hpp"
#include "microcav/interior_field.hpp"
#include "microcav/mode_field.hpp"
#include "microcav/numerics.hpp"
#include "microcav/two_level.hpp"

namespace microcav {

/// Bhattacharyya coefficient sum_j sqrt(P_j Q_j) on one mesh.
inline double intensity_overlap(const ProbabilityGrid& p, const ProbabilityGrid& q) {
  require_same_mesh(p.mesh, q.mesh, "intensity_overlap");
  CompensatedSum s;
  for (std::size_t j = 0; j < p.size(); ++j) s.add(std::sqrt(p[j] * q[j]));
  return std::min(1.0, s.value());
}

/// Bhattacharyya coefficient between grids of the same mesh family at different epsilon.
/// build_mesh keeps the cells with fixed (x/a, y/b), so equal grid_per_axis and cell count
/// identify cells by index under the affine deformation.
inline double deformed_overlap(const ProbabilityGrid& p, const ProbabilityGrid& q) {
  if (!p.mesh || !q.mesh || p.mesh->grid_per_axis != q.mesh->grid_per_axis ||
      p.size() != q.size() || p.mesh->grid_per_axis == 0)
    throw MeshMismatchError("deformed_overlap: grids are not from one mesh family");
  CompensatedSum s;
  for (std::size_t j = 0; j < p.size(); ++j) s.add(std::sqrt(p[j] * q[j]));
  return std::min(1.0, s.value());
}

// ---------------------------------------------------------------------------
// Trajectory analyses

struct AvoidedCrossing {
  double epsilon_star = 0.0;
  double gap = 0.0;
  std::size_t index = 0;  ///< grid index of the sampled minimum
};

/// Minimum of |z1 - z2| over the grid, refined by a parabola through the neighbors.
/// Absent when the sampled minimum sits at either end of the grid.
inline std::optional<AvoidedCrossing> detect_avoided_crossing(const std::vector<double>& eps,
                                                              const std::vector<cplx>& z1,
                                                              const std::vector<cplx>& z2) {
  if (eps.size() != z1.size() || eps.size() != z2.size())
    throw DomainError("detect_avoided_crossing: series lengths differ");
  if (eps.size() < 3) throw DomainError("detect_avoided_crossing: need at least 3 points");
  const std::size_t n = eps.size();
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = std::abs(z1[i] - z2[i]);
  const double lo = *std::min_element(gap.begin(), gap.end());
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < n; ++i)
    if (gap[i] == lo) ties.push_back(i);
  const std::size_t i = ties[ties.size() / 2];
  if (i == 0 || i + 1 == n) return std::nullopt;

  AvoidedCrossing out{eps[i], gap[i], i};
  const double x0 = eps[i - 1], x1 = eps[i], x2 = eps[i + 1];
  const double y0 = gap[i - 1], y1 = gap[i], y2 = gap[i + 1];
  // Newton form: p(x) = y0 + d1 (x - x0) + d2 (x - x0)(x - x1)
  const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
  const double d2 = (d12 - d01) / (x2 - x0);
  if (d2 > 0.0) {
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * d2);
    const double xmin = std::min(x0, x2), xmax = std::max(x0, x2);
    if (xv >= xmin && xv <= xmax) {
      out.epsilon_star = xv;
      out.gap = std::max(0.0, y0 + d01 * (xv - x0) + d2 * (xv - x0) * (xv - x1));
    }
  }
  return out;
}

namespace detail {
/// True when the series takes both signs; exact zeros in between do not count as either.
inline bool changes_sign(const std::vector<double>& v) {
  int last = 0;
  for (double x : v) {
    const int s = (x > 0.0) - (x < 0.0);
    if (s == 0) continue;
    if (last != 0 && s != last) return true;
    last = s;
  }
  return false;
}
}  // namespace detail

struct RegimePattern {
  bool real_crossing = false;
  bool imag_crossing = false;
};

/// Sign changes of Re(z1 - z2) and Im(z1 - z2) for |eps - eps_star| <= half_window.
inline RegimePattern crossing_pattern(const std::vector<double>& eps, const std::vector<cplx>& z1,
                                      const std::vector<cplx>& z2, double eps_star,
                                      double half_window) {
  std::vector<double> re, im;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (std::abs(eps[i] - eps_star) <= half_window) {
      re.push_back((z1[i] - z2[i]).real());
      im.push_back((z1[i] - z2[i]).imag());
    }
  return {detail::changes_sign(re), detail::changes_sign(im)};
}

/// Strong: real parts keep a gap while imaginary parts cross. Weak: the reverse.
inline Regime classify_trajectories(const std::vector<double>& eps, const std::vector<cplx>& z1,
                                    const std::vector<cplx>& z2, double eps_star,
                                    double half_window) {
  const auto p = crossing_pattern(eps, z1, z2, eps_star, half_window);
  if (!p.real_crossing && p.imag_crossing) return Regime::Strong;
  if (p.real_crossing && !p.imag_crossing) return Regime::Weak;
  throw IndeterminateRegimeError(std::string("trajectories near epsilon* show ") +
                                 (p.real_crossing ? "crossings" : "no crossing") +
                                 " in both real and imaginary parts");
}

// ---------------------------------------------------------------------------
// Sweep

struct QuantumNumbers {
  int m = 8;  ///< angular
  int l = 5;  ///< radial
};

struct SweepConfig {
  std::vector<double> epsilons;
  SolverConfig solver{};
  std::array<QuantumNumbers, 2> levels{{{8, 5}, {14, 3}}};
  /// Starting values (closed lambda, open zeta) per level; derived from the circle
  /// modes of `levels` when absent.
  std::optional<std::array<std::pair<double, cplx>, 2>> start;
  int grid_per_axis = 200;
  int tracking_grid = 48;
  double floor_fraction = kDefaultFloorFraction;
  double min_window = 0.05;
  double window_factor = 3.0;
  double overlap_threshold = 0.5;
  double regime_window = 0.0125;  ///< half-width around epsilon* for the crossing analysis

  void validate() const {
    solver.validate();
    if (epsilons.empty()) throw ConfigError("sweep: empty epsilon grid");
    for (double e : epsilons)
      if (!(e >= 0.0)) throw ConfigError("sweep: epsilon must be >= 0");
    if (epsilons.size() > 1) {
      const bool up = epsilons[1] > epsilons[0];
      for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (up ? !(epsilons[i] > epsilons[i - 1]) : !(epsilons[i] < epsilons[i - 1]))
          throw ConfigError("sweep: epsilon grid must be strictly monotone");
    }
    if (grid_per_axis < kMinGridPerAxis || tracking_grid < kMinGridPerAxis)
      throw ConfigError("sweep: grids must have at least " + std::to_string(kMinGridPerAxis) +
                        " cells per axis");
    if (!(floor_fraction >= 0.0 && floor_fraction < 1.0))
      throw ConfigError("sweep: floor fraction must lie in [0, 1)");
    if (!(min_window > 0.0) || !(window_factor > 0.0)) throw ConfigError("sweep: bad window");
    if (!(overlap_threshold > 0.0 && overlap_threshold < 1.0))
      throw ConfigError("sweep: overlap threshold must lie in (0, 1)");
  }
};

/// 24 points on [0, 0.23] merged with 16 on [0.20, 0.23].
inline std::vector<double> default_epsilon_grid() {
  std::vector<double> e;
  for (int i = 0; i < 24; ++i) e.push_back(0.23 * i / 23.0);
  for (int i = 0; i < 16; ++i) e.push_back(0.20 + 0.03 * i / 15.0);
  std::sort(e.begin(), e.end());
  std::vector<double> out;
  for (double x : e)
    if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
  return out;
}

struct LevelState {
  double lambda = 0.0;
  cplx zeta{};
  Resonance closed, open;
  ProbabilityGrid q_closed, p_open;          ///< on the evaluation mesh
  ProbabilityGrid track_closed, track_open;  ///< on the coarse tracking mesh
  double overlap_closed = 1.0;  ///< with the previous step, same level
  double overlap_open = 1.0;
  EntropyReport report;
};

struct SweepStep {
  double epsilon = 0.0;
  std::array<LevelState, 2> level;
};

struct StepFields {
  std::array<ModeField, 2> open, closed;
};

struct SweepResult {
  double refractive_index = 0.0;
  std::vector<SweepStep> steps;
  std::optional<AvoidedCrossing> avoided_crossing;
  std::optional<Regime> regime;
  std::string regime_note;  ///< why no regime was assigned, if so
  bool exchange_detected = false;
  double regime_window = 0.0125;

  std::vector<double> epsilons() const {
    std::vector<double> e;
    for (const auto& s : steps) e.push_back(s.epsilon);
    return e;
  }
  std::vector<cplx> zeta(int j) const {
    std::vector<cplx> z;
    for (const auto& s : steps) z.push_back(s.level[std::size_t(j)].zeta);
    return z;
  }
  std::vector<double> lambda(int j) const {
    std::vector<double> z;
    for (const auto& s : steps) z.push_back(s.level[std::size_t(j)].lambda);
    return z;
  }
};

/// Requires a detected avoided crossing.
inline Regime classify_sweep_regime(const SweepResult& s) {
  if (!s.avoided_crossing) throw IndeterminateRegimeError("no avoided crossing in the sweep");
  return classify_trajectories(s.epsilons(), s.zeta(0), s.zeta(1), s.avoided_crossing->epsilon_star,
                               s.regime_window);
}

/// True iff each open track ends closer (by intensity overlap) to the other level's
/// closed pattern than to its own.
inline bool detect_mode_exchange(const SweepResult& s) {
  if (s.steps.empty()) throw DomainError("detect_mode_exchange: empty sweep");
  const auto& last = s.steps.back();
  for (const auto& lv : last.level)
    if (!lv.q_closed.mesh || lv.q_closed.probabilities.empty())
      throw DomainError("detect_mode_exchange: closed fields missing at the last epsilon");
  if (!s.avoided_crossing) return false;
  const bool up = s.steps.size() < 2 || s.steps[1].epsilon > s.steps[0].epsilon;
  if (up ? last.epsilon <= s.avoided_crossing->epsilon_star
         : last.epsilon >= s.avoided_crossing->epsilon_star)
    return false;
  const auto& a = last.level[0];
  const auto& b = last.level[1];
  return intensity_overlap(a.p_open, b.q_closed) > intensity_overlap(a.p_open, a.q_closed) &&
         intensity_overlap(b.p_open, a.q_closed) > intensity_overlap(b.p_open, b.q_closed);
}

namespace detail {

struct Candidate {
  cplx k;
  Resonance res;
  ProbabilityGrid track;
};

inline Candidate make_candidate(const CavityGeometry& g, const SolverConfig& cfg, cplx k,
                                ResonanceKind kind, const MeshPtr& track_mesh) {
  Candidate c{k, make_resonance(g, cfg, k, kind), {}};
  c.track = normalize_intensity(interior_field(c.res, g, track_mesh));
  return c;
}

/// Best injective assignment of candidates to the two levels by overlap sum, among
/// candidates inside each level's window. Returns indices or throws.
inline std::array<std::size_t, 2> assign(const std::vector<Candidate>& cands,
                                         const std::array<const ProbabilityGrid*, 2>& prev,
                                         const std::array<cplx, 2>& pred,
                                         const std::array<double, 2>& window, double threshold,
                                         double eps, double last_eps, const char* what,
                                         std::array<double, 2>& overlaps) {
  std::array<std::vector<double>, 2> o;
  std::array<bool, 2> any{false, false};
  for (std::size_t j = 0; j < 2; ++j)
    for (const auto& c : cands) {
      const bool inside = std::abs(c.k - pred[j]) <= window[j];
      any[j] = any[j] || inside;
      o[j].push_back(inside ? deformed_overlap(*prev[j], c.track) : -1.0);
    }
  for (std::size_t j = 0; j < 2; ++j)
    if (!any[j])
      throw TrackingError(eps, last_eps,
                          std::string(what) + " level " + std::to_string(j + 1) +
                              " lost: no solution within the continuation window at epsilon " +
                              format_double(eps));
  double best = -1.0;
  std::array<std::size_t, 2> pick{0, 0};
  for (std::size_t a = 0; a < cands.size(); ++a)
    for (std::size_t b = 0; b < cands.size(); ++b) {
      if (a == b || o[0][a] < 0.0 || o[1][b] < 0.0) continue;
      if (o[0][a] + o[1][b] > best) {
        best = o[0][a] + o[1][b];
        pick = {a, b};
      }
    }
  if (best < 0.0 || o[0][pick[0]] < threshold || o[1][pick[1]] < threshold)
    throw TrackingError(eps, last_eps,
                        std::string(what) + " tracks ambiguous at epsilon " + format_double(eps) +
                            ": overlap with the previous step below threshold");
  overlaps = {o[0][pick[0]], o[1][pick[1]]};
  return pick;
}

inline void add_unique(std::vector<cplx>& ks, cplx k, double tol) {
  for (cplx q : ks)
    if (std::abs(q - k) < tol) return;
  ks.push_back(k);
}

}  // namespace detail

using StepCallback = std::function<void(const SweepStep&, const StepFields&)>;

namespace detail {

inline std::array<std::pair<double, cplx>, 2> starting_values(const SweepConfig& c) {
  if (c.start) return *c.start;
  std::array<std::pair<double, cplx>, 2> out;
  const double n = c.solver.refractive_index;
  for (std::size_t j = 0; j < 2; ++j)
    out[j] = {circle_closed_eigenvalue(c.levels[j].m, c.levels[j].l, n),
              circle_open_resonance(c.levels[j].m, c.levels[j].l, n)};
  return out;
}

}  // namespace detail

/// Tracks the two configured levels over the epsilon grid.
/// On failure the exception propagates; `partial` (if given) then holds the completed steps.
inline SweepResult sweep(const SweepConfig& config, const StepCallback& on_step = {},
                         SweepResult* partial = nullptr) {
  using detail::Candidate;
  config.validate();
  const SolverConfig& sc = config.solver;
  const auto& eps = config.epsilons;
  SweepResult result;
  result.refractive_index = sc.refractive_index;
  result.regime_window = config.regime_window;
  const double dup_tol = 1e-8;

  try {
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double e = eps[i];
      const double last_good = i > 0 ? eps[i - 1] : e;
      const auto g = discretize_boundary(e, sc.element_count);
      const auto track_mesh = build_mesh(g, config.tracking_grid);
      std::array<Candidate, 2> closed_pick, open_pick;
      std::array<double, 2> ov_closed{1.0, 1.0}, ov_open{1.0, 1.0};

      if (i == 0) {
        const auto start = detail::starting_values(config);
        const double w = config.min_window;
        for (std::size_t j = 0; j < 2; ++j) {
          const double lam0 = start[j].first;
          const auto roots = closed_roots_in(g, sc, std::max(lam0 - w, 1e-3), lam0 + w,
                                             std::min(1.0 / sc.scan_density, w / 8.0));
          if (roots.empty())
            throw TrackingError(e, e, "closed level " + std::to_string(j + 1) +
                                          " not found near its starting value");
          const double lam = *std::min_element(roots.begin(), roots.end(), [&](double x, double y) {
            return std::abs(x - lam0) < std::abs(y - lam0);
          });
          closed_pick[j] = detail::make_candidate(g, sc, lam, ResonanceKind::Closed, track_mesh);

          const cplx z0 = start[j].second;
          const auto r = refine_open_root(g, sc, z0, 0.005);
          if (!r.converged || std::abs(r.root - z0) > w || !(r.root.imag() < 0.0))
            throw TrackingError(e, e, "open level " + std::to_string(j + 1) +
                                          " not found near its starting value");
          open_pick[j] = detail::make_candidate(g, sc, r.root, ResonanceKind::Open, track_mesh);
        }
        if (closed_pick[0].k == closed_pick[1].k || std::abs(open_pick[0].k - open_pick[1].k) < dup_tol)
          throw TrackingError(e, e, "both levels start on the same solution");
      } else {
        const auto& p1 = result.steps[i - 1];
        const SweepStep* p2 = i >= 2 ? &result.steps[i - 2] : nullptr;
        const double ratio = p2 ? (e - p1.epsilon) / (p1.epsilon - p2->epsilon) : 0.0;
        std::array<cplx, 2> pred_c, pred_o;
        std::array<double, 2> win_c, win_o;
        std::array<const ProbabilityGrid*, 2> prev_c, prev_o;
        for (std::size_t j = 0; j < 2; ++j) {
          const auto& a = p1.level[j];
          const double dl = p2 ? (a.lambda - p2->level[j].lambda) * ratio : 0.0;
          const cplx dz = p2 ? (a.zeta - p2->level[j].zeta) * ratio : cplx(0.0);
          pred_c[j] = a.lambda + dl;
          pred_o[j] = a.zeta + dz;
          win_c[j] = std::max(config.min_window, config.window_factor * std::abs(dl));
          win_o[j] = std::max(config.min_window, config.window_factor * std::abs(dz));
          prev_c[j] = &a.track_closed;
          prev_o[j] = &a.track_open;
        }

        // Candidates: Muller from the predictions and the previous values, then once more
        // from each prediction with every root found so far divided out, so that a
        // neighbor arbitrarily close to the first hit is still resolved.
        auto collect = [&](ResonanceKind kind, const std::array<cplx, 2>& pred,
                           const std::array<double, 2>& win, std::vector<cplx> ks) {
          auto try_root = [&](cplx seed, double spread, std::span<const cplx> deflate) {
            const auto r = refine_root(g, sc, kind, seed, spread, deflate);
            if (!r.converged) return;
            if (kind == ResonanceKind::Open && !(r.root.imag() < 0.0)) return;
            if (kind == ResonanceKind::Closed && !(r.root.real() > 0.0)) return;
            detail::add_unique(ks, r.root, dup_tol);
          };
          for (std::size_t j = 0; j < 2; ++j) {
            const double spread = std::clamp(win[j] / 10.0, 1e-4, 0.005);
            try_root(pred[j], spread, {});
            const cplx prev = kind == ResonanceKind::Open ? p1.level[j].zeta : p1.level[j].lambda;
            try_root(prev, spread, {});
          }
          for (std::size_t j = 0; j < 2; ++j) {
            const std::vector<cplx> known = ks;
            try_root(pred[j], std::clamp(win[j] / 10.0, 1e-4, 0.005), known);
          }
          std::vector<Candidate> cands;
          for (cplx k : ks)
            if (std::abs(k - pred[0]) <= win[0] || std::abs(k - pred[1]) <= win[1])
              cands.push_back(detail::make_candidate(g, sc, k, kind, track_mesh));
          return cands;
        };

        // Closed: a scan adds every other root in each window.
        std::vector<cplx> scanned;
        for (std::size_t j = 0; j < 2; ++j) {
          const double lo = std::max(pred_c[j].real() - win_c[j], 1e-3);
          const double hi = pred_c[j].real() + win_c[j];
          const double step = std::min(1.0 / sc.scan_density, win_c[j] / 8.0);
          for (double k : closed_roots_in(g, sc, lo, hi, step)) detail::add_unique(scanned, k, dup_tol);
        }
        auto cc = collect(ResonanceKind::Closed, pred_c, win_c, scanned);
        auto pc = detail::assign(cc, prev_c, pred_c, win_c, config.overlap_threshold, e, last_good,
                                 "closed", ov_closed);
        closed_pick = {cc[pc[0]], cc[pc[1]]};

        auto oc = collect(ResonanceKind::Open, pred_o, win_o, {});
        auto po = detail::assign(oc, prev_o, pred_o, win_o, config.overlap_threshold, e, last_good,
                                 "open", ov_open);
        open_pick = {oc[po[0]], oc[po[1]]};
      }

      const auto mesh = build_mesh(g, config.grid_per_axis);
      StepFields fields;
      SweepStep step;
      step.epsilon = e;
      for (std::size_t j = 0; j < 2; ++j) {
        fields.closed[j] = interior_field(closed_pick[j].res, g, mesh);
        fields.open[j] = interior_field(open_pick[j].res, g, mesh);
        auto& lv = step.level[j];
        lv.lambda = closed_pick[j].k.real();
        lv.zeta = open_pick[j].k;
        lv.closed = std::move(closed_pick[j].res);
        lv.open = std::move(open_pick[j].res);
        lv.q_closed = normalize_intensity(fields.closed[j]);
        lv.p_open = normalize_intensity(fields.open[j]);
        lv.track_closed = std::move(closed_pick[j].track);
        lv.track_open = std::move(open_pick[j].track);
        lv.overlap_closed = ov_closed[j];
        lv.overlap_open = ov_open[j];
        lv.report = make_entropy_report(lv.p_open, lv.q_closed, lv.lambda, lv.zeta, e, int(j) + 1,
                                        config.floor_fraction);
      }
      result.steps.push_back(std::move(step));
      if (on_step) on_step(result.steps.back(), fields);
    }
  } catch (const Error&) {
    if (partial) *partial = result;
    throw;
  }

  if (result.steps.size() >= 3) {
    result.avoided_crossing = detect_avoided_crossing(result.epsilons(), result.zeta(0), result.zeta(1));
    if (result.avoided_crossing) {
      try {
        result.regime = classify_sweep_regime(result);
      } catch (const IndeterminateRegimeError& ex) {
        result.regime_note = ex.what();
      }
    } else {
      result.regime_note = "the open-level gap has no interior minimum";
    }
  }
  result.exchange_detected = detect_mode_exchange(result);
  return result;
}

}  // namespace microcav
