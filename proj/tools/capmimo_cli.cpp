// Command-line front end: parameter sweeps, single solves, pattern dumps and
// the wavenumber-gain table.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capmimo/capmimo.hpp"
#include "capmimo/config.hpp"
#include "capmimo/results_io.hpp"

namespace {

using namespace capmimo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "1,2,3", "1-5" or a mix such as "1-3,7".
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(s, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("--seeds: empty range '" + part + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("--seeds: cannot parse '" + part + "'");
    }
  }
  if (out.empty()) throw ConfigError("--seeds: no seeds given");
  return out;
}

std::vector<Scheme> parse_schemes(const std::string& s) {
  std::vector<Scheme> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_scheme(part));
  if (out.empty()) throw ConfigError("--scheme: no scheme given");
  return out;
}

struct CommonArgs {
  std::string config;
  std::string scheme;
  std::string seeds = "1-5";
  std::string nf = "auto";
  std::string out;
  std::string format = "csv";
  std::size_t jobs = 1;
  bool serial = false;
  bool random = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, const std::string& default_scheme) {
  a.scheme = default_scheme;
  cmd->add_option("--config", a.config, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--scheme", a.scheme, "Comma-separated schemes: pdm, mf, digital, upper")
      ->capture_default_str();
  cmd->add_option("--seeds", a.seeds, "Seed list, e.g. 1-5 or 1,3,7")->capture_default_str();
  cmd->add_option("--nf", a.nf, "Retained Fourier terms: 9, 81, 225 or auto")->capture_default_str();
  cmd->add_option("--out", a.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", a.format, "csv or jsonl")->capture_default_str();
  cmd->add_option("--jobs", a.jobs, "Concurrent sweep points")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--serial", a.serial, "Single-threaded, bit-reproducible output");
}

AppConfig load(const CommonArgs& a) { return a.config.empty() ? AppConfig{} : load_config(a.config); }

RunOptions options(const CommonArgs& a) {
  RunOptions o;
  o.schemes = parse_schemes(a.scheme);
  o.seeds = parse_seeds(a.seeds);
  o.nf = NfSetting::parse(a.nf);
  o.jobs = a.jobs;
  o.serial = a.serial;
  return o;
}

int finish(const std::vector<ResultRow>& rows, const CommonArgs& a) {
  emit_results(rows, a.out, parse_format(a.format));
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.ok(); });
  if (failed > 0) {
    std::cerr << failed << " of " << rows.size() << " rows failed; see the error column\n";
    return kExitPartial;
  }
  return kExitOk;
}

int dump_patterns(const CommonArgs& a) {
  const AppConfig cfg = load(a);
  const RunOptions opt = options(a);
  const Scheme scheme = opt.schemes.front();
  const Scenario sc = with_nf(cfg.scenario, opt.nf);
  const PreparedScenario prep(sc);
  PatternSet best;
  if (scheme == Scheme::mf) {
    best = mf_design(prep.channels, prep.grid, sc.budget).patterns;
  } else if (scheme == Scheme::pdm) {
    const TruncationOrder o = sc.effective_order();
    const ChannelSpectrum spec = channel_spectrum(prep.channels, prep.grid, o);
    double best_rate = -1.0;
    for (auto seed : opt.seeds) {
      SolverConfig scfg = sc.solver;
      scfg.order = o;
      scfg.seed = seed;
      SolveResult r = run_pdm(spec, prep.grid, sc.budget, scfg);
      if (r.sum_rate > best_rate) {
        best_rate = r.sum_rate;
        best = std::move(r.patterns);
      }
    }
  } else {
    throw ConfigError("dump-patterns supports the pdm and mf schemes only");
  }
  with_output(a.out, [&](std::ostream& os) { write_patterns(os, best, prep.grid, parse_format(a.format)); });
  return kExitOk;
}

int wavenumber_gain(const CommonArgs& a) {
  const AppConfig cfg = load(a);
  std::vector<double> freqs;
  for (double g : cfg.freqs_ghz) freqs.push_back(g * 1e9);
  const auto table = wavenumber_gain_study(cfg.distances_m, freqs, ratio_grid(cfg.max_ratio, cfg.ratio_step),
                                           cfg.line_samples);
  with_output(a.out, [&](std::ostream& os) { write_gain(os, table, parse_format(a.format)); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern design and benchmarking for multi-user continuous-aperture MIMO"};
  app.require_subcommand(1);

  CommonArgs aperture_args, power_args, geometry_args, gain_args, solve_args, dump_args;
  auto* sa = app.add_subcommand("sweep-aperture", "Sum rate against aperture area");
  add_common(sa, aperture_args, "pdm,mf,digital,upper");
  auto* sp = app.add_subcommand("sweep-power", "Sum rate against transmit power");
  add_common(sp, power_args, "pdm,mf,digital,upper");
  auto* sg = app.add_subcommand("sweep-geometry", "Sum rate against user radius and height");
  add_common(sg, geometry_args, "pdm,mf,digital,upper");
  sg->add_flag("--random", geometry_args.random, "Use random placements instead of the circle grid");
  auto* wg = app.add_subcommand("wavenumber-gain", "Normalized wavenumber-domain channel gain");
  add_common(wg, gain_args, "pdm");
  auto* so = app.add_subcommand("solve", "Solve the configured scenario");
  add_common(so, solve_args, "pdm");
  auto* dp = app.add_subcommand("dump-patterns", "Write optimized pattern fields over the grid");
  add_common(dp, dump_args, "pdm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sa) {
      const AppConfig cfg = load(aperture_args);
      return finish(sweep_aperture(cfg.scenario, cfg.areas_m2, options(aperture_args)), aperture_args);
    }
    if (*sp) {
      const AppConfig cfg = load(power_args);
      return finish(sweep_power(cfg.scenario, cfg.powers_ma2, options(power_args)), power_args);
    }
    if (*sg) {
      const AppConfig cfg = load(geometry_args);
      const RunOptions opt = options(geometry_args);
      if (geometry_args.random) {
        const std::size_t draws = cfg.random_draws ? cfg.random_draws : 10;
        return finish(sweep_random_geometry(cfg.scenario, draws, cfg.placement_seed, opt), geometry_args);
      }
      return finish(sweep_geometry(cfg.scenario, cfg.radii_m, cfg.heights_m, opt), geometry_args);
    }
    if (*wg) return wavenumber_gain(gain_args);
    if (*so) {
      const AppConfig cfg = load(solve_args);
      const RunOptions opt = options(solve_args);
      const std::vector<SweepPoint> pts{{"solve", "", 0.0, "", 0.0}};
      return finish(run_sweep(pts, {with_nf(cfg.scenario, opt.nf)}, opt), solve_args);
    }
    if (*dp) return dump_patterns(dump_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}
