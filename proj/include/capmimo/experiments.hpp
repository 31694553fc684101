#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "capmimo/baselines.hpp"
#include "capmimo/closed_form.hpp"
#include "capmimo/em_core.hpp"
#include "capmimo/metrics.hpp"
#include "capmimo/pdm_solver.hpp"
#include "capmimo/wavenumber.hpp"

namespace capmimo {

enum class Scheme { pdm, mf, digital, upper };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::pdm: return "pdm";
    case Scheme::mf: return "mf";
    case Scheme::digital: return "digital";
    case Scheme::upper: return "upper";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "pdm") return Scheme::pdm;
  if (s == "mf") return Scheme::mf;
  if (s == "digital") return Scheme::digital;
  if (s == "upper") return Scheme::upper;
  throw ConfigError("unknown scheme '" + s + "' (expected pdm, mf, digital or upper)");
}

/// Number of retained Fourier terms. `automatic` derives the order from the
/// aperture size and wavelength.
struct NfSetting {
  bool automatic = true;
  TruncationOrder pinned{4, 4, 0};

  static NfSetting fixed(int n) { return {false, {n, n, 0}}; }
  static NfSetting parse(const std::string& s) {
    if (s == "auto") return {};
    if (s == "9") return fixed(1);
    if (s == "81") return fixed(4);
    if (s == "225") return fixed(7);
    throw ConfigError("--nf must be one of 9, 81, 225, auto (got '" + s + "')");
  }
  std::string label() const { return automatic ? "auto" : std::to_string(pinned.count()); }
};

/// The fixed order used by the interference-free upper bound.
inline constexpr TruncationOrder kUpperBoundOrder{7, 7, 0};

struct Scenario {
  Aperture aperture;
  std::vector<Real3> users;
  WaveParams wave{2.4e9};
  LinkBudget budget;
  std::optional<TruncationOrder> order;  // empty: derived from the aperture
  std::size_t grid_n = 32;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::pdm;
  SolverConfig solver;

  TruncationOrder effective_order() const {
    return order ? *order : truncation_order(aperture, wave);
  }

  void validate() const {
    if (users.empty()) throw ConfigError("scenario: at least one user is required");
    if (grid_n < 1) throw ConfigError("scenario: grid_n must be >= 1");
    if (!(aperture.Lx > 0.0) || !(aperture.Ly > 0.0))
      throw ConfigError("scenario: aperture side lengths must be positive");
    budget.validate();
    solver.validate();
    for (std::size_t k = 0; k < users.size(); ++k) {
      const Real3& u = users[k];
      if (!u.allFinite()) throw ConfigError("scenario: user " + std::to_string(k) + " has non-finite position");
      if (std::abs(u.z() - aperture.center.z()) < kSingularityRadius && aperture.contains_xy(u)) {
        throw ConfigError("scenario: user " + std::to_string(k) + " lies on the aperture");
      }
    }
    const TruncationOrder o = effective_order();
    if (o.Nx < 1 || o.Ny < 1) throw ConfigError("scenario: truncation order must be at least (1,1,0)");
  }
};

inline std::vector<Real3> default_users() {
  std::vector<Real3> u;
  for (double s : {1.0, 5.0})
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0}) u.emplace_back(sx * s, sy * s, 30.0);
  return u;
}

inline Scenario default_scenario() {
  Scenario sc;
  sc.aperture = Aperture{0.5, 0.5, Real3::Zero()};
  sc.users = default_users();
  sc.wave = WaveParams(2.4e9);
  sc.budget = LinkBudget::from_ma2(100.0, 5.6e-3);
  sc.grid_n = 32;
  sc.solver.order = truncation_order(sc.aperture, sc.wave);
  return sc;
}

/// K users evenly spaced on a circle of radius R at height L.
inline std::vector<Real3> circle_users(std::size_t K, double R, double L) {
  std::vector<Real3> u;
  for (std::size_t k = 1; k <= K; ++k) {
    const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(K);
    u.emplace_back(R * std::cos(phi), R * std::sin(phi), L);
  }
  return u;
}

/// Independent uniform draws of radius, height and angle per user.
inline std::vector<Real3> random_users(std::size_t K, std::uint64_t seed, double r_lo = 2.0,
                                       double r_hi = 30.0, double l_lo = 2.0, double l_hi = 30.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> R(r_lo, r_hi);
  std::uniform_real_distribution<double> L(l_lo, l_hi);
  std::uniform_real_distribution<double> P(0.0, 2.0 * kPi);
  std::vector<Real3> u;
  for (std::size_t k = 0; k < K; ++k) {
    const double r = R(rng);
    const double l = L(rng);
    const double phi = P(rng);
    u.emplace_back(r * std::cos(phi), r * std::sin(phi), l);
  }
  return u;
}

struct ResultRow {
  std::string sweep;
  std::string variable;
  double value = 0.0;
  std::string variable2;
  double value2 = 0.0;
  std::string scheme;
  std::size_t nf = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  std::size_t iterations = 0;
  double wall_time_s = 0.0;
  double power_ma2 = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Where a row sits inside a sweep.
struct SweepPoint {
  std::string sweep;
  std::string variable;
  double value = 0.0;
  std::string variable2;
  double value2 = 0.0;
};

struct RunOptions {
  std::vector<Scheme> schemes{Scheme::pdm};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  NfSetting nf{};
  std::size_t jobs = 1;
  /// Bit-exact mode: single-threaded and wall times reported as 0.
  bool serial = false;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Everything a solve needs, precomputed once per scenario.
struct PreparedScenario {
  Scenario scenario;
  QuadratureGrid grid;
  std::vector<ChannelSamples> channels;

  explicit PreparedScenario(Scenario sc) : scenario(std::move(sc)) {
    scenario.validate();
    grid = build_grid(scenario.aperture, scenario.grid_n, scenario.grid_n);
    channels = channel_samples(scenario.users, grid, scenario.wave);
  }
};

struct SchemeOutcome {
  double sum_rate = 0.0;
  std::size_t iterations = 0;
  double power = 0.0;  // A^2
  std::size_t nf = 0;
};

/// Solves one scenario with one scheme for each seed. The per-seed result
/// for deterministic schemes is repeated.
inline std::vector<SchemeOutcome> solve_scheme(const PreparedScenario& prep, Scheme scheme,
                                               const std::vector<std::uint64_t>& seeds) {
  const Scenario& sc = prep.scenario;
  std::vector<SchemeOutcome> out;
  switch (scheme) {
    case Scheme::pdm: {
      const TruncationOrder o = sc.effective_order();
      const ChannelSpectrum spec = channel_spectrum(prep.channels, prep.grid, o);
      for (auto seed : seeds) {
        SolverConfig cfg = sc.solver;
        cfg.order = o;
        cfg.seed = seed;
        cfg.interference_free = false;
        const SolveResult r = run_pdm(spec, prep.grid, sc.budget, cfg);
        SchemeOutcome so;
        so.sum_rate = sum_rate(r.patterns, prep.channels, prep.grid, sc.budget);
        so.iterations = r.iterations;
        so.power = transmit_power(r.patterns, prep.grid);
        so.nf = o.count();
        out.push_back(so);
      }
      break;
    }
    case Scheme::upper: {
      const ChannelSpectrum spec = channel_spectrum(prep.channels, prep.grid, kUpperBoundOrder);
      for (auto seed : seeds) {
        SolverConfig cfg = sc.solver;
        cfg.order = kUpperBoundOrder;
        cfg.seed = seed;
        const BcdOutcome r = interference_free_bound(spec, sc.budget, cfg);
        double p = 0.0;
        for (const auto& w : r.w) p += w.squaredNorm();
        out.push_back({r.rate(), r.iterations, p, kUpperBoundOrder.count()});
      }
      break;
    }
    case Scheme::mf: {
      const MatchedFilterDesign mf = mf_design(prep.channels, prep.grid, sc.budget);
      const SchemeOutcome so{sum_rate(mf.patterns, prep.channels, prep.grid, sc.budget), 0,
                             transmit_power(mf.patterns, prep.grid), 0};
      out.assign(seeds.size(), so);
      break;
    }
    case Scheme::digital: {
      const PatchLayout layout = make_patch_layout(sc.aperture, sc.wave);
      const QuadratureGrid pg = patch_grid(layout, sc.aperture, sc.grid_n);
      const auto pch = channel_samples(sc.users, pg, sc.wave);
      const auto H = patch_channels(pch, layout, pg);
      for (auto seed : seeds) {
        SolverConfig cfg = sc.solver;
        cfg.seed = seed;
        const BcdOutcome r = solve_digital_mimo(H, sc.budget, cfg);
        double p = 0.0;
        for (const auto& w : r.w) p += w.squaredNorm();
        out.push_back({r.rate(), r.iterations, p, layout.size()});
      }
      break;
    }
  }
  return out;
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Exceptions are the
/// task's responsibility.
inline void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Evaluates every (point, scheme, seed) combination. Output order follows
/// points, then schemes, then seeds, regardless of completion order. A
/// failing (point, scheme) yields flagged rows instead of aborting.
inline std::vector<ResultRow> run_sweep(const std::vector<SweepPoint>& points,
                                        const std::vector<Scenario>& scenarios, const RunOptions& opt) {
  if (points.size() != scenarios.size()) throw ContractViolation("run_sweep: points/scenarios mismatch");
  const std::size_t S = opt.schemes.size();
  const std::size_t tasks = points.size() * S;
  std::vector<std::vector<ResultRow>> slots(tasks);

  auto task = [&](std::size_t t) {
    const std::size_t p = t / S;
    const Scheme scheme = opt.schemes[t % S];
    const SweepPoint& pt = points[p];
    auto base = [&](std::uint64_t seed) {
      ResultRow r;
      r.sweep = pt.sweep;
      r.variable = pt.variable;
      r.value = pt.value;
      r.variable2 = pt.variable2;
      r.value2 = pt.value2;
      r.scheme = to_string(scheme);
      r.seed = seed;
      return r;
    };
    std::vector<ResultRow> rows;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PreparedScenario prep(scenarios[p]);
      const auto outs = solve_scheme(prep, scheme, opt.seeds);
      const double wall = opt.serial ? 0.0 : detail::seconds_since(t0) / static_cast<double>(outs.size());
      for (std::size_t i = 0; i < outs.size(); ++i) {
        ResultRow r = base(opt.seeds[i]);
        r.nf = outs[i].nf;
        r.sum_rate = outs[i].sum_rate;
        r.iterations = outs[i].iterations;
        r.power_ma2 = outs[i].power / kMilliAmp2;
        r.wall_time_s = wall;
        rows.push_back(std::move(r));
      }
    } catch (const std::exception& e) {
      rows.clear();
      for (auto seed : opt.seeds) {
        ResultRow r = base(seed);
        r.error = e.what();
        rows.push_back(std::move(r));
      }
    }
    slots[t] = std::move(rows);
  };
  parallel_for(tasks, opt.serial ? 1 : opt.jobs, task);

  std::vector<ResultRow> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  return out;
}

inline Scenario with_nf(Scenario sc, const NfSetting& nf) {
  if (nf.automatic) {
    sc.order.reset();
  } else {
    sc.order = nf.pinned;
  }
  sc.solver.order = sc.effective_order();
  return sc;
}

/// Square apertures of the given areas (m^2), default users otherwise.
inline std::vector<ResultRow> sweep_aperture(const Scenario& base, const std::vector<double>& areas,
                                             const RunOptions& opt) {
  std::vector<SweepPoint> pts;
  std::vector<Scenario> scs;
  for (double a : areas) {
    Scenario sc = base;
    const double L = std::sqrt(std::max(a, 0.0));
    sc.aperture.Lx = L;
    sc.aperture.Ly = L;
    scs.push_back(with_nf(sc, opt.nf));
    pts.push_back({"aperture", "area_m2", a, "", 0.0});
  }
  return run_sweep(pts, scs, opt);
}

/// Transmit-power sweep in mA^2.
inline std::vector<ResultRow> sweep_power(const Scenario& base, const std::vector<double>& powers_ma2,
                                          const RunOptions& opt) {
  std::vector<SweepPoint> pts;
  std::vector<Scenario> scs;
  for (double p : powers_ma2) {
    Scenario sc = base;
    sc.budget.P_T = p * kMilliAmp2;
    scs.push_back(with_nf(sc, opt.nf));
    pts.push_back({"power", "pt_ma2", p, "", 0.0});
  }
  return run_sweep(pts, scs, opt);
}

/// Users on a circle of radius R at height L, for every (L, R) pair.
inline std::vector<ResultRow> sweep_geometry(const Scenario& base, const std::vector<double>& radii,
                                             const std::vector<double>& heights, const RunOptions& opt) {
  std::vector<SweepPoint> pts;
  std::vector<Scenario> scs;
  const std::size_t K = base.users.size();
  for (double L : heights) {
    for (double R : radii) {
      Scenario sc = base;
      sc.users = circle_users(K, R, L);
      scs.push_back(with_nf(sc, opt.nf));
      pts.push_back({"geometry", "radius_m", R, "height_m", L});
    }
  }
  return run_sweep(pts, scs, opt);
}

/// Random placements inside the radius/height volume, one point per draw.
inline std::vector<ResultRow> sweep_random_geometry(const Scenario& base, std::size_t draws,
                                                    std::uint64_t placement_seed, const RunOptions& opt) {
  std::vector<SweepPoint> pts;
  std::vector<Scenario> scs;
  for (std::size_t d = 0; d < draws; ++d) {
    Scenario sc = base;
    sc.users = random_users(base.users.size(), placement_seed + d);
    scs.push_back(with_nf(sc, opt.nf));
    pts.push_back({"random-geometry", "draw", static_cast<double>(d), "placement_seed",
                   static_cast<double>(placement_seed + d)});
  }
  return run_sweep(pts, scs, opt);
}

/// Largest successful sum rate among rows that match the predicate.
inline std::optional<double> best_rate(const std::vector<ResultRow>& rows,
                                       const std::function<bool(const ResultRow&)>& match) {
  std::optional<double> best;
  for (const auto& r : rows) {
    if (!r.ok() || !match(r)) continue;
    if (!best || r.sum_rate > *best) best = r.sum_rate;
  }
  return best;
}

struct GainSample {
  double distance_m = 0.0;
  double freq_hz = 0.0;
  double kappa_ratio = 0.0;  // kappa_x / kappa0
  double gain_db = 0.0;      // relative to the peak over the ratio grid
};

/// One-dimensional wavenumber spectrum of the channel seen by a broadside
/// user at (0, 0, d) from a line aperture |s_x| <= half_length, normalized
/// to its peak over `ratios`.
inline std::vector<GainSample> wavenumber_gain_study(const std::vector<double>& distances,
                                                     const std::vector<double>& freqs,
                                                     const std::vector<double>& ratios,
                                                     std::size_t samples = 4000,
                                                     double half_length = 0.5) {
  if (ratios.empty()) throw ConfigError("wavenumber_gain_study: empty ratio grid");
  if (samples < 2) throw ConfigError("wavenumber_gain_study: need at least 2 samples");
  std::vector<GainSample> out;
  for (double d : distances) {
    for (double f : freqs) {
      const WaveParams wave(f);
      const Real3 user(0.0, 0.0, d);
      const double dx = 2.0 * half_length / static_cast<double>(samples);
      std::vector<double> xs(samples);
      std::vector<ComplexMat3> g(samples);
      for (std::size_t i = 0; i < samples; ++i) {
        xs[i] = -half_length + (static_cast<double>(i) + 0.5) * dx;
        g[i] = green_free_space(user, Real3(xs[i], 0.0, 0.0), wave);
      }
      std::vector<double> power(ratios.size());
      for (std::size_t r = 0; r < ratios.size(); ++r) {
        const double kx = ratios[r] * wave.kappa0();
        ComplexMat3 acc = ComplexMat3::Zero();
        for (std::size_t i = 0; i < samples; ++i) acc += (dx * std::exp(-kJ * (kx * xs[i]))) * g[i];
        power[r] = acc.squaredNorm();
      }
      const double peak = *std::max_element(power.begin(), power.end());
      if (!(peak > 0.0)) throw DegenerateChannelError("wavenumber_gain_study: zero spectrum");
      for (std::size_t r = 0; r < ratios.size(); ++r) {
        out.push_back({d, f, ratios[r], 10.0 * std::log10(power[r] / peak)});
      }
    }
  }
  return out;
}

/// Evenly spaced ratio grid from -max_ratio to max_ratio with the given step.
inline std::vector<double> ratio_grid(double max_ratio = 2.0, double step = 0.01) {
  std::vector<double> r;
  const int n = static_cast<int>(std::lround(max_ratio / step));
  for (int i = -n; i <= n; ++i) r.push_back(i * step);
  return r;
}

}  // namespace capmimo
