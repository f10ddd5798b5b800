#include "kfhd/standard.hpp"

#include <cmath>
#include <stdexcept>

namespace kfhd {

NoiseBasis standard_basis() {
    NoiseBasis b;
    b.modes = {{0.2, {1, 0}, {0, 0}, ModeKind::pair}, {0.1, {0, 0}, {1, 0}, ModeKind::pair},
               {0.1, {2, 0}, {1, 0}, ModeKind::pair}};
    return b;
}

void normalize_mass(PhaseField& f, double mass) {
    const double m = integrate(f);
    if (!(m > 0.0)) throw std::invalid_argument("normalize_mass: field has no positive mass");
    for (double& x : f.values) x *= mass / m;
}

PhaseField maxwellian(const GridSpec& g, double mean, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("maxwellian: variance must be positive");
    PhaseField f = sample_field(g, [&](const double*, const double* v) {
        double r2 = 0.0;
        for (int c = 0; c < g.d; ++c) r2 += (v[c] - mean) * (v[c] - mean);
        return std::exp(-0.5 * r2 / variance);
    });
    normalize_mass(f);
    return f;
}

StandardSetup standard_setup(int n_x, int n_v) {
    StandardSetup s;
    s.grid = make_grid(3.14159265358979323846, 6.0, n_x, n_v, 1);
    s.scheme.T = 1.0;
    s.scheme.eps = 0.3;
    s.scheme.n = 16;
    s.scheme.seed = 20240601;
    s.basis = standard_basis();
    s.drift = sinusoidal_kernel(s.grid, 0.5, 1);
    s.f0 = sample_field(s.grid, [](const double* x, const double* v) {
        const double u = v[0] - 0.5;
        return (1.0 + 0.3 * std::cos(x[0])) * std::exp(-0.5 * u * u / 0.4);
    });
    normalize_mass(s.f0);
    return s;
}

}  // namespace kfhd
