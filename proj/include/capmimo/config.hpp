#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "capmimo/experiments.hpp"

namespace capmimo {

/// Everything the CLI reads from a config file. Keys carry their unit in
/// the name; missing keys keep the defaults below.
struct AppConfig {
  Scenario scenario = default_scenario();
  std::vector<double> areas_m2{0.0625, 0.25, 0.5625, 1.0, 1.5625, 2.25};
  std::vector<double> powers_ma2{10.0, 31.62, 100.0, 316.2, 1000.0, 3162.0};
  std::vector<double> radii_m{0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0};
  std::vector<double> heights_m{2.0, 5.0, 10.0, 30.0};
  std::size_t random_draws = 0;
  std::uint64_t placement_seed = 1;
  std::vector<double> distances_m{0.1, 1.0, 10.0};
  std::vector<double> freqs_ghz{2.4};
  double max_ratio = 2.0;
  double ratio_step = 0.01;
  std::size_t line_samples = 4000;
};

namespace detail {

inline void reject_unknown(const toml::table& t, std::string_view section,
                           const std::set<std::string, std::less<>>& known) {
  for (const auto& [k, v] : t) {
    if (!known.count(k.str())) {
      throw ConfigError("config: unknown key '" + std::string(k.str()) + "' in [" + std::string(section) + "]");
    }
  }
}

inline double get_number(const toml::table& t, std::string_view key, double fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value<double>()) return *v;
  throw ConfigError("config: '" + std::string(key) + "' must be a number");
}

inline std::int64_t get_integer(const toml::table& t, std::string_view key, std::int64_t fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (!node->is_integer()) throw ConfigError("config: '" + std::string(key) + "' must be an integer");
  return *node->value<std::int64_t>();
}

inline std::size_t get_count(const toml::table& t, std::string_view key, std::size_t fallback) {
  const auto v = get_integer(t, key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError("config: '" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> get_numbers(const toml::table& t, std::string_view key,
                                       const std::vector<double>& fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  const auto* arr = node->as_array();
  if (!arr) throw ConfigError("config: '" + std::string(key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& el : *arr) {
    auto v = el.value<double>();
    if (!v) throw ConfigError("config: '" + std::string(key) + "' must contain only numbers");
    out.push_back(*v);
  }
  return out;
}

inline Real3 to_point(const toml::node& el, std::string_view key, std::size_t idx) {
  const auto* a = el.as_array();
  if (!a || a->size() != 3) {
    throw ConfigError("config: '" + std::string(key) + "' entry " + std::to_string(idx) +
                      " must be [x, y, z]");
  }
  Real3 p;
  for (std::size_t c = 0; c < 3; ++c) {
    auto v = (*a)[c].value<double>();
    if (!v) throw ConfigError("config: '" + std::string(key) + "' entry " + std::to_string(idx) + " is not numeric");
    p(static_cast<Eigen::Index>(c)) = *v;
  }
  return p;
}

inline const toml::table* section(const toml::table& root, std::string_view name) {
  const auto* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw ConfigError("config: [" + std::string(name) + "] must be a table");
  return t;
}

}  // namespace detail

inline AppConfig parse_config(const toml::table& root) {
  AppConfig cfg;
  detail::reject_unknown(root, "root", {"scenario", "solver", "sweep", "wavenumber"});

  if (const auto* s = detail::section(root, "scenario")) {
    detail::reject_unknown(*s, "scenario",
                           {"freq_ghz", "pt_ma2", "sigma2_v2m2", "aperture_lx_m", "aperture_ly_m",
                            "aperture_center_m", "grid_n", "users_m"});
    Scenario& sc = cfg.scenario;
    sc.wave = WaveParams(detail::get_number(*s, "freq_ghz", sc.wave.frequency() / 1e9) * 1e9);
    sc.budget = LinkBudget::from_ma2(detail::get_number(*s, "pt_ma2", sc.budget.pt_ma2()),
                                     detail::get_number(*s, "sigma2_v2m2", sc.budget.sigma2));
    sc.aperture.Lx = detail::get_number(*s, "aperture_lx_m", sc.aperture.Lx);
    sc.aperture.Ly = detail::get_number(*s, "aperture_ly_m", sc.aperture.Ly);
    if (const auto* c = s->get("aperture_center_m")) sc.aperture.center = detail::to_point(*c, "aperture_center_m", 0);
    sc.grid_n = detail::get_count(*s, "grid_n", sc.grid_n);
    if (const auto* u = s->get("users_m")) {
      const auto* arr = u->as_array();
      if (!arr) throw ConfigError("config: 'users_m' must be an array of [x, y, z]");
      sc.users.clear();
      for (std::size_t i = 0; i < arr->size(); ++i) sc.users.push_back(detail::to_point((*arr)[i], "users_m", i));
    }
  }
  if (const auto* s = detail::section(root, "solver")) {
    detail::reject_unknown(*s, "solver", {"max_iters", "rel_tol", "zeta_tol"});
    SolverConfig& sv = cfg.scenario.solver;
    sv.max_iters = detail::get_count(*s, "max_iters", sv.max_iters);
    sv.rel_tol = detail::get_number(*s, "rel_tol", sv.rel_tol);
    sv.zeta_tol = detail::get_number(*s, "zeta_tol", sv.zeta_tol);
  }
  if (const auto* s = detail::section(root, "sweep")) {
    detail::reject_unknown(*s, "sweep",
                           {"areas_m2", "powers_ma2", "radii_m", "heights_m", "random_draws", "placement_seed"});
    cfg.areas_m2 = detail::get_numbers(*s, "areas_m2", cfg.areas_m2);
    cfg.powers_ma2 = detail::get_numbers(*s, "powers_ma2", cfg.powers_ma2);
    cfg.radii_m = detail::get_numbers(*s, "radii_m", cfg.radii_m);
    cfg.heights_m = detail::get_numbers(*s, "heights_m", cfg.heights_m);
    cfg.random_draws = detail::get_count(*s, "random_draws", cfg.random_draws);
    cfg.placement_seed = static_cast<std::uint64_t>(detail::get_count(*s, "placement_seed", cfg.placement_seed));
  }
  if (const auto* s = detail::section(root, "wavenumber")) {
    detail::reject_unknown(*s, "wavenumber", {"distances_m", "freqs_ghz", "max_ratio", "ratio_step", "samples"});
    cfg.distances_m = detail::get_numbers(*s, "distances_m", cfg.distances_m);
    cfg.freqs_ghz = detail::get_numbers(*s, "freqs_ghz", cfg.freqs_ghz);
    cfg.max_ratio = detail::get_number(*s, "max_ratio", cfg.max_ratio);
    cfg.ratio_step = detail::get_number(*s, "ratio_step", cfg.ratio_step);
    cfg.line_samples = detail::get_count(*s, "samples", cfg.line_samples);
  }
  cfg.scenario.solver.order = cfg.scenario.effective_order();
  cfg.scenario.validate();
  if (!(cfg.ratio_step > 0.0) || !(cfg.max_ratio > 0.0)) {
    throw ConfigError("config: max_ratio and ratio_step must be positive");
  }
  return cfg;
}

inline AppConfig parse_config_string(std::string_view text, std::string_view source = "<string>") {
  try {
    return parse_config(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    throw ConfigError("config: " + std::string(source) + ": " + std::string(e.description()));
  }
}

inline AppConfig load_config(const std::string& path) {
  try {
    return parse_config(toml::parse_file(path));
  } catch (const toml::parse_error& e) {
    throw ConfigError("config: " + path + ": " + std::string(e.description()));
  }
}

}  // namespace capmimo
