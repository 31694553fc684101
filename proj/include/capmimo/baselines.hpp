#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "capmimo/em_core.hpp"
#include "capmimo/metrics.hpp"
#include "capmimo/pdm_solver.hpp"
#include "capmimo/wavenumber.hpp"

namespace capmimo {

struct MatchedFilterDesign {
  PatternSet patterns;
  std::vector<Complex3> combiners;
  double scale = 0.0;  // common amplitude sqrt(p)
};

/// Conjugate-channel patterns for a fixed y-polarized receiver, sharing one
/// amplitude chosen so the total power equals P_T.
inline MatchedFilterDesign mf_design(const std::vector<ChannelSamples>& channels,
                                     const QuadratureGrid& grid, const LinkBudget& budget) {
  const Complex3 psi(0.0, 1.0, 0.0);
  MatchedFilterDesign out;
  out.patterns.resize(channels.size());
  out.combiners.assign(channels.size(), psi);
  double raw = 0.0;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    detail::check_grid_samples(channels[k].size(), grid, "mf_design");
    out.patterns[k].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.patterns[k][i] = channels[k][i].adjoint() * psi;
      raw += grid.weights[i] * out.patterns[k][i].squaredNorm();
    }
  }
  if (!(raw > 0.0)) throw DegenerateChannelError("mf_design: all channels vanish on the combiner");
  out.scale = std::sqrt(budget.P_T / raw);
  for (auto& p : out.patterns)
    for (auto& v : p) v *= out.scale;
  return out;
}

/// Half-wavelength lattice of disc-shaped patches.
struct PatchLayout {
  std::size_t Mx = 0;
  std::size_t My = 0;
  double wavelength = 0.0;
  double nominal_area = 0.0;  // lambda^2 / (4 pi)
  double radius = 0.0;
  std::vector<Real3> centers;

  std::size_t size() const noexcept { return centers.size(); }
};

inline PatchLayout make_patch_layout(const Aperture& aperture, const WaveParams& wave) {
  PatchLayout p;
  p.wavelength = wave.wavelength();
  p.Mx = static_cast<std::size_t>(std::ceil(2.0 * aperture.Lx / p.wavelength));
  p.My = static_cast<std::size_t>(std::ceil(2.0 * aperture.Ly / p.wavelength));
  p.nominal_area = p.wavelength * p.wavelength / (4.0 * kPi);
  p.radius = std::sqrt(p.nominal_area / kPi);
  const std::size_t M = p.Mx * p.My;
  p.centers.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double x = static_cast<double>(m % p.Mx) * p.wavelength / 2 - aperture.Lx / 2;
    const double y = static_cast<double>(m / p.Mx) * p.wavelength / 2 - aperture.Ly / 2;
    p.centers.push_back(aperture.center + Real3(x, y, 0.0));
  }
  return p;
}

/// Grid point indices inside each patch disc (implicitly clipped to the aperture).
inline std::vector<std::vector<std::size_t>> patch_membership(const PatchLayout& layout,
                                                              const QuadratureGrid& grid) {
  std::vector<std::vector<std::size_t>> members(layout.size());
  const double r2 = layout.radius * layout.radius;
  for (std::size_t m = 0; m < layout.size(); ++m) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Real3 d = grid.points[i] - layout.centers[m];
      if (d.x() * d.x() + d.y() * d.y() <= r2) members[m].push_back(i);
    }
  }
  return members;
}

inline std::size_t min_patch_points(const PatchLayout& layout, const QuadratureGrid& grid) {
  std::size_t lo = grid.size();
  for (const auto& m : patch_membership(layout, grid)) lo = std::min(lo, m.size());
  return lo;
}

/// Doubles the grid resolution, starting from n x n, until every patch disc
/// holds at least `min_points` grid points.
inline QuadratureGrid patch_grid(const PatchLayout& layout, const Aperture& aperture, std::size_t n,
                                 std::size_t min_points = 9, std::size_t max_n = 1024) {
  for (; n <= max_n; n *= 2) {
    QuadratureGrid g = build_grid(aperture, n, n);
    if (min_patch_points(layout, g) >= min_points) return g;
  }
  throw ResolutionError("patch_grid: no grid up to " + std::to_string(max_n) +
                        " per side resolves every patch");
}

/// Per-user stacked patch channels [H_k1 ... H_kM] (3 x 3M), where
/// H_km = A_m^-1/2 * integral of G_k over the clipped disc and A_m is the
/// clipped disc area.
inline std::vector<Eigen::MatrixXcd> patch_channels(const std::vector<ChannelSamples>& channels,
                                                    const PatchLayout& layout,
                                                    const QuadratureGrid& grid) {
  const auto members = patch_membership(layout, grid);
  std::vector<double> area(layout.size(), 0.0);
  for (std::size_t m = 0; m < layout.size(); ++m) {
    if (members[m].empty()) {
      throw ResolutionError("patch_channels: patch " + std::to_string(m) +
                            " contains no grid points; use a finer grid");
    }
    for (auto i : members[m]) area[m] += grid.weights[i];
  }
  std::vector<Eigen::MatrixXcd> H(channels.size(),
                                  Eigen::MatrixXcd(3, 3 * static_cast<Eigen::Index>(layout.size())));
  for (std::size_t k = 0; k < channels.size(); ++k) {
    detail::check_grid_samples(channels[k].size(), grid, "patch_channels");
    for (std::size_t m = 0; m < layout.size(); ++m) {
      ComplexMat3 acc = ComplexMat3::Zero();
      for (auto i : members[m]) acc += grid.weights[i] * channels[k][i];
      H[k].block<3, 3>(0, 3 * static_cast<Eigen::Index>(m)) = acc / std::sqrt(area[m]);
    }
  }
  return H;
}

/// Patch-array sum-rate maximization with the same block-coordinate loop.
inline BcdOutcome solve_digital_mimo(const std::vector<Eigen::MatrixXcd>& H, const LinkBudget& budget,
                                     SolverConfig config) {
  config.interference_free = false;
  return run_bcd(H, budget, config);
}

/// Sum rate with every inter-user interference term removed, optimized
/// over the spectrum's coefficients.
inline BcdOutcome interference_free_bound(const ChannelSpectrum& spectrum, const LinkBudget& budget,
                                          SolverConfig config) {
  config.interference_free = true;
  std::vector<Eigen::MatrixXcd> H(spectrum.users());
  for (std::size_t k = 0; k < H.size(); ++k) H[k] = spectrum.stacked(k);
  return run_bcd(H, budget, config);
}

}  // namespace capmimo
