#pragma once

// Core simulator; config.hpp and results_io.hpp pull in TOML/JSON and are
// included separately.
#include "capmimo/types.hpp"
#include "capmimo/em_core.hpp"
#include "capmimo/hermitian_eigen.hpp"
#include "capmimo/wavenumber.hpp"
#include "capmimo/metrics.hpp"
#include "capmimo/closed_form.hpp"
#include "capmimo/pdm_solver.hpp"
#include "capmimo/baselines.hpp"
#include "capmimo/experiments.hpp"
