#pragma once

#include "kfhd/phase_grid.hpp"
#include "kfhd/spde_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kfhd {

// Second-order mean-field particle system on the periodic box [-L_x, L_x)^d with velocities in R^d.
// Coordinates are stored per particle: X[i * d + c], V[i * d + c].
struct ParticleEnsemble {
    int d = 1;
    double L_x = 0.0;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    double t = 0.0;
    std::vector<double> X;
    std::vector<double> V;

    int N() const { return d > 0 ? static_cast<int>(X.size() / static_cast<std::size_t>(d)) : 0; }
    double momentum(int c = 0) const;
    void validate() const;
};

// Maps x into [-L, L).
double wrap_periodic(double x, double L);

// N atoms drawn cell-wise from the grid density f (uniform within each cell), positions wrapped.
ParticleEnsemble sample_particles(const PhaseField& f, int N, std::uint64_t seed, double kappa = 1.0);

enum class ForceMethod { direct, binned };

std::string to_string(ForceMethod m);
ForceMethod force_from_string(const std::string& s);

// Multilinear periodic interpolation of a gridded spatial field at an arbitrary point.
double interpolate_spatial(const SpatialField& s, const double* x);

// Interaction force (1/N) sum_j V(X_i - X_j) for every particle, layout [i * d + c].
// `direct` interpolates V at each pair separation; `binned` deposits cloud-in-cell, convolves on the grid
// with the same routine as the PDE drift and gathers back.
std::vector<double> interaction_force(const ParticleEnsemble& e, const VectorSpatialField& V, ForceMethod method,
                                      int threads = 0);

struct ParticleConfig {
    double T = 1.0;
    double dt = 0.01;
    ForceMethod force = ForceMethod::binned;
    int keep_every = 0;  // 0 keeps only the initial and final states
    int threads = 0;     // 0 uses worker_threads()
};

struct ParticleTrajectory {
    double dt = 0.0;
    long long steps = 0;
    std::vector<ParticleEnsemble> snapshots;
    std::vector<double> momentum;  // first momentum component at every step

    const ParticleEnsemble& final() const { return snapshots.back(); }
};

// Euler-Maruyama: X += dt V, V += dt (F(X) - kappa V) + sqrt(kappa dt) xi. Increments are a pure
// function of (seed, step, particle, component). V may be empty for non-interacting particles.
ParticleTrajectory simulate_particles(const ParticleEnsemble& init, const VectorSpatialField& V,
                                      const ParticleConfig& cfg);

struct Bandwidth {
    double x = 0.2;
    double v = 0.2;
};

// 0.2 in each direction, raised to the grid spacing on coarse grids.
Bandwidth standard_bandwidth(const GridSpec& g);

// Gaussian smoothing of the atoms onto the grid, each atom a discretely normalized product bump,
// scaled to total grid mass `mass`. Atoms are accumulated in sorted order so relabelling is invisible.
PhaseField empirical_density(const ParticleEnsemble& e, const GridSpec& g, Bandwidth bw, double mass = 1.0);

// The same node-centered Gaussian applied to a grid field (periodic, mass preserving).
PhaseField smooth_field(const PhaseField& f, Bandwidth bw);

struct MeanFieldSeries {
    std::vector<double> t;
    std::vector<double> distance;     // L1(empirical, pde)
    std::vector<double> mc_distance;  // L1(empirical, smoothed pde): smoothing bias removed
    double terminal() const { return distance.back(); }
};

// Pairs particle snapshots with PDE snapshots at equal times. The PDE trajectory must be noise-free.
MeanFieldSeries compare_meanfield(const ParticleTrajectory& particles, const Trajectory& pde, Bandwidth bw);

// Noise-free PDE limit of the particle system: diffusion kappa/2, friction kappa, convolution drift V.
SchemeConfig meanfield_scheme(double kappa, double T);

// Binary snapshot: header "KFHDP1 d N t\n" then per particle X_1..X_d, V_1..V_d as little-endian doubles.
// The box and kappa are not stored and come from the caller on reading.
void write_particles(const std::string& path, const ParticleEnsemble& e);
ParticleEnsemble read_particles(const std::string& path, double L_x, double kappa = 1.0);

}  // namespace kfhd
