// microcav: batch front end for the cavity solver.
//
//   microcav solve   --closed|--open --epsilon E --window 8:12 [--imag-window -0.3:0]
//   microcav sweep   --out DIR [--n 2.825] [--eps default|a:b:count|e1,e2,...]
//   microcav entropy A.txt B.txt [--floor [F]]
//   microcav model   --eta11 .. --eta22 .. --delta11 re,im --delta22 re,im --delta-prime ..
//
// Exit status: 0 ok, 2 usage, 3 input mismatch, 4 numeric domain, 5 non-convergence.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microcav/entropy.hpp"
#include "microcav/helmholtz_bem.hpp"
#include "microcav/io.hpp"
#include "microcav/mode_field.hpp"
#include "microcav/tracking.hpp"
#include "microcav/two_level.hpp"

namespace fs = std::filesystem;
using namespace microcav;

namespace {

enum Exit { kOk = 0, kUsage = 2, kMismatch = 3, kDomain = 4, kNoConvergence = 5 };

std::pair<double, double> parse_range(const std::string& s, const char* what) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || s.find(':', colon + 1) != std::string::npos)
    throw ConfigError(std::string(what) + " must look like min:max");
  const double lo = parse_double(s.substr(0, colon));
  const double hi = parse_double(s.substr(colon + 1));
  if (!(lo <= hi)) throw ConfigError(std::string(what) + ": min exceeds max");
  return {lo, hi};
}

cplx parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return {parse_double(s), 0.0};
  return {parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1))};
}

QuantumNumbers parse_quantum(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError("level must look like m,l");
  const double m = parse_double(s.substr(0, comma)), l = parse_double(s.substr(comma + 1));
  if (m < 0 || l < 1 || m != std::floor(m) || l != std::floor(l))
    throw ConfigError("level quantum numbers need integer m >= 0, l >= 1");
  return {int(m), int(l)};
}

std::vector<double> parse_eps_grid(const std::string& s) {
  if (s == "default") return default_epsilon_grid();
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0, pos;
    while ((pos = s.find(':', start)) != std::string::npos) {
      parts.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    parts.push_back(s.substr(start));
    if (parts.size() != 3) throw ConfigError("epsilon grid must look like a:b:count");
    const double a = parse_double(parts[0]), b = parse_double(parts[1]);
    const double c = parse_double(parts[2]);
    if (c < 1 || c != std::floor(c)) throw ConfigError("epsilon grid count must be a positive integer");
    const int n = int(c);
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto item = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!item.empty()) out.push_back(parse_double(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct SolverOptions {
  double n = 2.825;
  std::size_t elements = 128;
  std::string parity = "ee";
  double scan_density = 40.0;
  double imag_scan_density = 10.0;
  double root_tol = 1e-10;
  int max_iterations = 60;

  void add(CLI::App* app) {
    app->add_option("--n", n, "Refractive index (interior; exterior is 1)")->capture_default_str();
    app->add_option("--elements", elements, "Boundary nodes M")->capture_default_str();
    app->add_option("--parity", parity, "Symmetry class ee|eo|oe|oo, or none")->capture_default_str();
    app->add_option("--scan-density", scan_density, "Seeds per unit Re k")->capture_default_str();
    app->add_option("--imag-scan-density", imag_scan_density, "Seeds per unit Im k")
        ->capture_default_str();
    app->add_option("--root-tol", root_tol, "Root tolerance on |dk|")->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "Iteration cap per seed")
        ->capture_default_str();
  }

  SolverConfig build() const {
    SolverConfig c;
    c.refractive_index = n;
    c.element_count = elements;
    c.symmetry = parity == "none" ? std::nullopt : std::optional<Parity>(parse_parity(parity));
    c.scan_density = scan_density;
    c.imag_scan_density = imag_scan_density;
    c.root_tol = root_tol;
    c.max_iterations = max_iterations;
    return c;
  }
};

fs::path cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MICROCAV_CACHE_DIR"); env && *env) return env;
  return ".microcav-cache";
}

int run_solve(bool closed, double epsilon, const std::string& window, const std::string& imag_window,
              const SolverOptions& so, const std::string& cache_flag, bool no_cache,
              const std::string& out_path) {
  SolverConfig cfg = so.build();
  const auto [re_lo, re_hi] = parse_range(window, "--window");
  cfg.k_window.re_min = re_lo;
  cfg.k_window.re_max = re_hi;
  if (closed) {
    cfg.k_window.im_min = cfg.k_window.im_max = 0.0;
  } else {
    const auto [im_lo, im_hi] = parse_range(imag_window, "--imag-window");
    cfg.k_window.im_min = im_lo;
    cfg.k_window.im_max = im_hi;
  }
  cfg.validate();
  const auto geometry = discretize_boundary(epsilon, cfg.element_count);
  const ResonanceKind kind = closed ? ResonanceKind::Closed : ResonanceKind::Open;

  std::vector<std::string> warnings;
  const CacheKey key{epsilon, kind, cfg};
  ResonanceCache cache(cache_dir(cache_flag));
  std::optional<std::vector<Resonance>> found;
  if (!no_cache) found = cache.lookup(key, warnings);
  const bool cached = found.has_value();
  if (!found) {
    if (closed) {
      found = find_closed_eigenvalues(geometry, cfg);
    } else {
      SearchDiagnostics diag;
      found = find_open_resonances(geometry, cfg, &diag);
      if (diag.failed_seeds > 0)
        warnings.push_back(std::to_string(diag.failed_seeds) + " of " + std::to_string(diag.seeds) +
                           " seeds did not converge");
      for (const auto& w : diag.warnings)
        if (w.rfind("all seeds", 0) == 0) warnings.push_back(w);
    }
    if (!no_cache) cache.store(key, *found);
  }

  json out;
  out["cached"] = cached;
  out["kind"] = std::string(to_string(kind));
  out["epsilon"] = epsilon;
  out["refractive_index"] = cfg.refractive_index;
  out["element_count"] = cfg.element_count;
  out["symmetry"] = cfg.symmetry ? json(to_string(*cfg.symmetry)) : json(nullptr);
  out["window"] = {{"re", {cfg.k_window.re_min, cfg.k_window.re_max}},
                   {"im", {cfg.k_window.im_min, cfg.k_window.im_max}}};
  json list = json::array();
  for (const auto& r : *found) list.push_back({{"k", to_json(r.k)}, {"residual", r.residual}});
  out["resonances"] = std::move(list);
  out["warnings"] = warnings;
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << out.dump(2) << '\n';
  if (!out_path.empty()) {
    json full = out;
    full["resonances"] = json::array();
    for (const auto& r : *found) full["resonances"].push_back(to_json(r));
    atomic_write(out_path, full.dump(2) + '\n');
  }
  return kOk;
}

struct SweepOptions {
  std::string out_dir;
  std::string eps = "default";
  std::string level1 = "8,5", level2 = "14,3";
  int grid = 200;
  int tracking_grid = 48;
  double floor_fraction = kDefaultFloorFraction;
  double min_window = 0.05;
  double window_factor = 3.0;
  double overlap_threshold = 0.5;
  bool no_fields = false;
};

int run_sweep(const SweepOptions& o, const SolverOptions& so) {
  SweepConfig cfg;
  cfg.solver = so.build();
  cfg.epsilons = parse_eps_grid(o.eps);
  cfg.levels = {parse_quantum(o.level1), parse_quantum(o.level2)};
  cfg.grid_per_axis = o.grid;
  cfg.tracking_grid = o.tracking_grid;
  cfg.floor_fraction = o.floor_fraction;
  cfg.min_window = o.min_window;
  cfg.window_factor = o.window_factor;
  cfg.overlap_threshold = o.overlap_threshold;
  cfg.validate();

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
  auto on_step = [&](const SweepStep& step, const StepFields& fields) {
    std::cerr << "epsilon " << format_double(step.epsilon) << " done\n";
    if (o.no_fields) return;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& lv = step.level[j];
      const int level = int(j) + 1;
      atomic_write(dir / "fields" / field_dump_name(step.epsilon, level, ResonanceKind::Open),
                   field_dump_text(fields.open[j], &lv.p_open));
      atomic_write(dir / "fields" / field_dump_name(step.epsilon, level, ResonanceKind::Closed),
                   field_dump_text(fields.closed[j], &lv.q_closed));
    }
  };
  SweepResult partial;
  try {
    const auto result = sweep(cfg, on_step, &partial);
    write_sweep_artifacts(dir, result);
    json summary;
    summary["steps"] = result.steps.size();
    summary["avoided_crossing"] = to_json(result)["avoided_crossing"];
    summary["regime"] = result.regime ? json(std::string(to_string(*result.regime))) : json(nullptr);
    summary["exchange_detected"] = result.exchange_detected;
    std::cout << summary.dump(2) << '\n';
    return kOk;
  } catch (const Error& e) {
    write_sweep_artifacts(dir, partial);
    std::string failing = "unknown";
    if (const auto* t = dynamic_cast<const TrackingError*>(&e)) failing = format_double(t->failed_epsilon());
    else if (partial.steps.size() < cfg.epsilons.size())
      failing = format_double(cfg.epsilons[partial.steps.size()]);
    atomic_write(dir / "FAILED", "epsilon " + failing + "\n" + e.what() + "\n");
    throw;
  }
}

int run_entropy(const std::string& a, const std::string& b, std::optional<double> floor_fraction) {
  const auto fa = read_field_dump(a);
  const auto fb = read_field_dump(b);
  if (fa.amplitudes.size() != fb.amplitudes.size())
    throw MeshMismatchError("field dumps have different cell counts (" +
                            std::to_string(fa.amplitudes.size()) + " vs " +
                            std::to_string(fb.amplitudes.size()) + ")");
  const auto p = normalize_intensity(fa);
  const auto q = normalize_intensity(fb);
  require_same_mesh(p.mesh, q.mesh, "entropy");
  json out;
  out["epsilon"] = fa.mesh->epsilon;
  out["n_cells"] = p.size();
  out["d_kl"] = kl_divergence_floored(p, q, floor_fraction.value_or(0.0));
  out["e_open"] = shannon_entropy(p);
  out["e_closed"] = shannon_entropy(q);
  out["delta_e"] = entropy_difference(p, q);
  out["floor_fraction"] = floor_fraction ? json(*floor_fraction) : json(nullptr);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int run_model(double eta11, double eta22, const std::string& d11, const std::string& d22,
              double dp, double tol) {
  TwoLevelHamiltonian h{eta11, eta22, parse_complex(d11), parse_complex(d22), dp};
  const auto ev = eigenvalues(h, tol);
  json out;
  out["omega_1"] = to_json(h.omega_1());
  out["omega_2"] = to_json(h.omega_2());
  out["zeta_plus"] = to_json(ev.zeta_plus);
  out["zeta_minus"] = to_json(ev.zeta_minus);
  out["d"] = to_json(ev.d);
  out["exceptional_point_gap"] = to_json(exceptional_point_gap(h));
  out["regime"] = std::string(to_string(ev.regime));
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const MeshMismatchError*>(&e)) return kMismatch;
  if (dynamic_cast<const ConvergenceError*>(&e)) return kNoConvergence;
  if (dynamic_cast<const IndeterminateRegimeError*>(&e)) return kNoConvergence;
  if (dynamic_cast<const DomainError*>(&e)) return kDomain;
  return kDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed and open modes of an elliptic dielectric microcavity"};
  app.set_config("--config", "", "Key=value configuration file; flags override it");
  app.require_subcommand(1);

  SolverOptions solve_solver, sweep_solver;

  auto* solve = app.add_subcommand("solve", "List closed eigenvalues or open resonances in a window");
  bool closed = false, open = false, no_cache = false;
  double epsilon = 0.0;
  std::string window = "8.5:9.8", imag_window = "-0.3:0", cache_flag, out_path;
  auto* kind = solve->add_option_group("kind");
  kind->add_flag("--closed", closed, "Dirichlet problem");
  kind->add_flag("--open", open, "Dielectric (TM) resonances");
  kind->require_option(1);
  solve->add_option("--epsilon", epsilon, "Deformation")->capture_default_str();
  solve->add_option("--window", window, "Re k interval min:max")->capture_default_str();
  solve->add_option("--imag-window", imag_window, "Im k interval min:max (open only)")
      ->capture_default_str();
  solve->add_option("--cache-dir", cache_flag, "Cache directory (default $MICROCAV_CACHE_DIR)");
  solve->add_flag("--no-cache", no_cache, "Neither read nor write the cache");
  solve->add_option("--out", out_path, "Also write the full listing with densities");
  solve_solver.add(solve);

  auto* sw = app.add_subcommand("sweep", "Track two levels over a deformation sweep");
  SweepOptions so;
  sw->add_option("--out", so.out_dir, "Output directory")->required();
  sw->add_option("--eps", so.eps, "default | a:b:count | e1,e2,...")->capture_default_str();
  sw->add_option("--level1", so.level1, "Quantum numbers m,l of level 1")->capture_default_str();
  sw->add_option("--level2", so.level2, "Quantum numbers m,l of level 2")->capture_default_str();
  sw->add_option("--grid", so.grid, "Evaluation mesh cells per axis")->capture_default_str();
  sw->add_option("--tracking-grid", so.tracking_grid, "Tracking mesh cells per axis")
      ->capture_default_str();
  sw->add_option("--floor", so.floor_fraction, "Intensity floor for the relative entropy")
      ->capture_default_str();
  sw->add_option("--min-window", so.min_window, "Minimum continuation window in k")
      ->capture_default_str();
  sw->add_option("--window-factor", so.window_factor, "Window as a multiple of the last move")
      ->capture_default_str();
  sw->add_option("--overlap-threshold", so.overlap_threshold, "Track acceptance overlap")
      ->capture_default_str();
  sw->add_flag("--no-fields", so.no_fields, "Skip the per-step field dumps");
  sweep_solver.add(sw);

  auto* en = app.add_subcommand("entropy", "Relative and Shannon entropies of two field dumps");
  std::string fa, fb;
  std::optional<double> floor_fraction;
  en->add_option("open", fa, "Field dump giving P")->required()->check(CLI::ExistingFile);
  en->add_option("closed", fb, "Field dump giving Q")->required()->check(CLI::ExistingFile);
  en->add_option("--floor", floor_fraction, "Floor Q by (1-f)Q + f/N; bare flag uses 1e-9")
      ->expected(0, 1)
      ->default_str(format_double(kDefaultFloorFraction));

  auto* mo = app.add_subcommand("model", "Eigenvalues and regime of the two-level model");
  double eta11 = 0.0, eta22 = 0.0, dp = 0.0, tol = kDefaultRegimeTolerance;
  std::string d11 = "0,0", d22 = "0,0";
  mo->add_option("--eta11", eta11)->required();
  mo->add_option("--eta22", eta22)->required();
  mo->add_option("--delta11", d11, "re,im")->capture_default_str();
  mo->add_option("--delta22", d22, "re,im")->capture_default_str();
  mo->add_option("--delta-prime", dp)->required();
  mo->add_option("--tol", tol)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve) return run_solve(closed, epsilon, window, imag_window, solve_solver, cache_flag, no_cache, out_path);
    if (*sw) return run_sweep(so, sweep_solver);
    if (*en) {
      if (en->count("--floor") && !floor_fraction) floor_fraction = kDefaultFloorFraction;
      return run_entropy(fa, fb, floor_fraction);
    }
    if (*mo) return run_model(eta11, eta22, d11, d22, dp, tol);
  } catch (const InfiniteDivergenceError& e) {
    std::cerr << "error: " << e.what() << " (retry with --floor)\n";
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return classify(e);
  }
  return kUsage;
}
