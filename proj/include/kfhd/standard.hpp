#pragma once

#include "kfhd/noise_model.hpp"
#include "kfhd/phase_grid.hpp"
#include "kfhd/spde_engine.hpp"

namespace kfhd {

// Reference configuration shared by the regression tests, the acceptance harness and the CLI presets:
// d = 1 on [-pi, pi) x [-6, 6), T = 1, eps = 0.3, n = 16, three trig pairs, V(x) = 0.5 sin(x) and
// f0 = (1 + 0.3 cos x) N(v; 0.5, 0.4) scaled to unit grid mass.
struct StandardSetup {
    GridSpec grid;
    SchemeConfig scheme;
    NoiseBasis basis;
    DriftSpec drift;
    PhaseField f0;
};

StandardSetup standard_setup(int n_x = 64, int n_v = 64);

NoiseBasis standard_basis();

// Spatially uniform Maxwellian with the given velocity mean and variance, unit grid mass.
PhaseField maxwellian(const GridSpec& g, double mean = 0.0, double variance = 1.0);

// Rescales f so its grid integral equals `mass`.
void normalize_mass(PhaseField& f, double mass = 1.0);

}  // namespace kfhd
