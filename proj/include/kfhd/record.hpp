#pragma once

#include "kfhd/phase_grid.hpp"

namespace kfhd {

// Floor added under the square root in the Fisher information.
inline constexpr double kFisherFloor = 1e-14;

struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double min = 0.0;
    double entropy = 0.0;      // int Psi(f)
    double fisher = 0.0;       // int |grad_v sqrt(f + eta)|^2
    double energy = 0.0;       // ||f||_2^2
    double grad_energy = 0.0;  // ||grad_v f||_2^2
    double clipped = 0.0;      // mass removed by the positivity projection in the step that produced f
    double boundary_fraction = 0.0;
};

// boundary_window is the fraction of L_v, measured from the velocity edge, counted as boundary.
DiagnosticsRecord record(const PhaseField& f, double t = 0.0, double clipped = 0.0, double boundary_window = 0.1);

}  // namespace kfhd
