#pragma once

// JSON serialization (complex numbers as [re, im]), atomic file writes, the on-disk
// resonance cache and the sweep artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "microcav/entropy.hpp"
#include "microcav/errors.hpp"
#include "microcav/helmholtz_bem.hpp"
#include "microcav/numerics.hpp"
#include "microcav/tracking.hpp"

namespace microcav {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("expected a complex number as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Resonance& r, bool with_density = true) {
  json j;
  j["k"] = to_json(r.k);
  j["kind"] = std::string(to_string(r.kind));
  j["residual"] = r.residual;
  j["symmetry"] = r.symmetry ? json(to_string(*r.symmetry)) : json(nullptr);
  j["epsilon"] = r.epsilon;
  j["refractive_index"] = r.refractive_index;
  j["element_count"] = r.element_count;
  if (with_density) {
    json d = json::array();
    for (cplx z : r.boundary_density) d.push_back(to_json(z));
    j["boundary_density"] = std::move(d);
  }
  return j;
}

inline Resonance resonance_from_json(const json& j) {
  Resonance r;
  r.k = complex_from_json(j.at("k"));
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "open" && kind != "closed") throw ConfigError("unknown resonance kind '" + kind + "'");
  r.kind = kind == "open" ? ResonanceKind::Open : ResonanceKind::Closed;
  r.residual = j.at("residual").get<double>();
  if (!j.at("symmetry").is_null()) r.symmetry = parse_parity(j.at("symmetry").get<std::string>());
  r.epsilon = j.at("epsilon").get<double>();
  r.refractive_index = j.at("refractive_index").get<double>();
  r.element_count = j.at("element_count").get<std::size_t>();
  if (j.contains("boundary_density"))
    for (const auto& z : j.at("boundary_density")) r.boundary_density.push_back(complex_from_json(z));
  return r;
}

inline json to_json(const EntropyReport& r) {
  return {{"epsilon", r.epsilon},       {"level", r.level},       {"d_kl", r.d_kl},
          {"e_open", r.e_open},         {"e_closed", r.e_closed}, {"delta_e", r.delta_e},
          {"lamb_shift", r.lamb_shift}, {"lambda", r.lambda},     {"zeta", to_json(r.zeta)}};
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Resonance cache: one JSON object per line, keyed by a hash of the solve inputs.

struct CacheKey {
  double epsilon;
  ResonanceKind kind;
  SolverConfig config;

  std::string hex() const {
    Fnv1a h;
    h.text("microcav-resonances-v1");
    h.real(epsilon);
    h.integer(kind == ResonanceKind::Open ? 1 : 0);
    h.real(config.refractive_index);
    h.integer(config.element_count);
    const auto& w = config.k_window;
    for (double x : {w.re_min, w.re_max, w.im_min, w.im_max, config.scan_density,
                     config.imag_scan_density, config.root_tol, config.max_decay,
                     config.residual_threshold})
      h.real(x);
    h.integer(std::uint64_t(config.max_iterations));
    h.text(config.symmetry ? to_string(*config.symmetry) : std::string("none"));
    return h.hex();
  }
};

class ResonanceCache {
public:
  explicit ResonanceCache(fs::path dir) : file_(std::move(dir) / "resonances.jsonl") {}

  const fs::path& file() const { return file_; }

  /// Records for the key, or nullopt. Unparseable lines are skipped and reported in `warnings`.
  std::optional<std::vector<Resonance>> lookup(const CacheKey& key,
                                               std::vector<std::string>& warnings) const {
    const auto id = key.hex();
    std::optional<std::vector<Resonance>> hit;
    for (const auto& j : read_lines(warnings)) {
      if (j.value("key", "") != id) continue;
      try {
        std::vector<Resonance> rs;
        for (const auto& r : j.at("resonances")) rs.push_back(resonance_from_json(r));
        hit = std::move(rs);
      } catch (const std::exception& e) {
        warnings.push_back(std::string("cache record ignored: ") + e.what());
      }
    }
    return hit;
  }

  void store(const CacheKey& key, const std::vector<Resonance>& rs) const {
    std::vector<std::string> ignored;
    const auto id = key.hex();
    std::string content;
    for (const auto& j : read_lines(ignored))
      if (j.value("key", "") != id) content += j.dump() + '\n';
    json rec;
    rec["key"] = id;
    rec["epsilon"] = key.epsilon;
    rec["kind"] = std::string(to_string(key.kind));
    rec["refractive_index"] = key.config.refractive_index;
    rec["element_count"] = key.config.element_count;
    json arr = json::array();
    for (const auto& r : rs) arr.push_back(to_json(r));
    rec["resonances"] = std::move(arr);
    content += rec.dump() + '\n';
    atomic_write(file_, content);
  }

private:
  std::vector<json> read_lines(std::vector<std::string>& warnings) const {
    std::vector<json> out;
    std::ifstream in(file_);
    if (!in) return out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        warnings.push_back("cache line " + std::to_string(n) + " is corrupt; ignored");
        continue;
      }
      out.push_back(std::move(j));
    }
    return out;
  }

  fs::path file_;
};

// ---------------------------------------------------------------------------
// Sweep artifacts

inline json to_json(const SweepResult& s) {
  json j;
  j["refractive_index"] = s.refractive_index;
  j["epsilons"] = s.epsilons();
  json levels = json::array();
  for (int lv = 0; lv < 2; ++lv) {
    json l;
    l["level"] = lv + 1;
    json lam = json::array(), zeta = json::array(), oc = json::array(), oo = json::array(),
         rep = json::array();
    for (const auto& st : s.steps) {
      const auto& x = st.level[std::size_t(lv)];
      lam.push_back(x.lambda);
      zeta.push_back(to_json(x.zeta));
      oc.push_back(x.overlap_closed);
      oo.push_back(x.overlap_open);
      rep.push_back(to_json(x.report));
    }
    l["lambda"] = std::move(lam);
    l["zeta"] = std::move(zeta);
    l["overlap_closed"] = std::move(oc);
    l["overlap_open"] = std::move(oo);
    l["reports"] = std::move(rep);
    levels.push_back(std::move(l));
  }
  j["levels"] = std::move(levels);
  if (s.avoided_crossing)
    j["avoided_crossing"] = {{"epsilon_star", s.avoided_crossing->epsilon_star},
                             {"gap", s.avoided_crossing->gap}};
  else
    j["avoided_crossing"] = nullptr;
  j["regime"] = s.regime ? json(std::string(to_string(*s.regime))) : json(nullptr);
  if (!s.regime_note.empty()) j["regime_note"] = s.regime_note;
  j["exchange_detected"] = s.exchange_detected;
  return j;
}

inline std::string regime_label(const SweepResult& s) {
  return s.regime ? std::string(to_string(*s.regime)) : std::string("indeterminate");
}

inline std::string entropy_csv(const SweepResult& s) {
  std::string out = std::string(kEntropyCsvHeader) + '\n';
  const auto regime = regime_label(s);
  for (const auto& st : s.steps)
    for (const auto& lv : st.level) out += entropy_csv_row(lv.report, regime) + '\n';
  return out;
}

/// One tidy table per figure, keyed by file name relative to plots/.
inline std::vector<std::pair<std::string, std::string>> plot_tables(const SweepResult& s) {
  std::string real = "epsilon,level,closed_lambda,open_re_zeta\n";
  std::string imag = "epsilon,level,open_im_zeta\n";
  std::string lamb = "epsilon,level,lamb_shift\n";
  std::string dkl = "epsilon,level,d_kl\n";
  std::string shannon = "epsilon,level,e_open,e_closed,delta_e,d_kl\n";
  for (const auto& st : s.steps)
    for (const auto& lv : st.level) {
      const auto e = format_double(st.epsilon) + ',' + std::to_string(lv.report.level) + ',';
      real += e + format_double(lv.lambda) + ',' + format_double(lv.zeta.real()) + '\n';
      imag += e + format_double(lv.zeta.imag()) + '\n';
      lamb += e + format_double(lv.report.lamb_shift) + '\n';
      dkl += e + format_double(lv.report.d_kl) + '\n';
      shannon += e + format_double(lv.report.e_open) + ',' + format_double(lv.report.e_closed) +
                 ',' + format_double(lv.report.delta_e) + ',' + format_double(lv.report.d_kl) + '\n';
    }
  return {{"fig1_real.csv", real},
          {"fig1_imag.csv", imag},
          {"fig3_lamb.csv", lamb},
          {"fig4_dkl.csv", dkl},
          {"fig5_shannon.csv", shannon}};
}

inline std::string field_dump_name(double epsilon, int level, ResonanceKind kind) {
  return "eps_" + format_double(epsilon) + "_level" + std::to_string(level) + "_" +
         std::string(to_string(kind)) + ".txt";
}

inline std::string field_dump_text(const ModeField& f, const ProbabilityGrid* p) {
  std::ostringstream os;
  write_field_dump(os, f, p);
  return os.str();
}

/// sweep.json, entropy.csv and plots/*.csv.
inline void write_sweep_artifacts(const fs::path& dir, const SweepResult& s) {
  atomic_write(dir / "sweep.json", to_json(s).dump(2) + '\n');
  atomic_write(dir / "entropy.csv", entropy_csv(s));
  for (const auto& [name, text] : plot_tables(s)) atomic_write(dir / "plots" / name, text);
}

}  // namespace microcav
