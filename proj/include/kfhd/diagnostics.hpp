#pragma once

#include "kfhd/noise_model.hpp"
#include "kfhd/record.hpp"
#include "kfhd/spde_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kfhd {

// Constant of the Burkholder-Davis-Gundy inequality used in the entropy bound.
inline constexpr double kBdgConstant = 3.0;

struct EntropyReport {
    int members = 0;
    double mean_sup_entropy = 0.0;   // E sup_t int Psi(f)
    double mean_fisher = 0.0;        // E int_0^T int |grad_v sqrt f|^2
    double initial_entropy = 0.0;    // int Psi(f0)
    double F3_l1 = 0.0;
    double c_F1 = 0.0;               // Young constant (1/2) C_BDG^2 ||F1||_inf
    double mass_term = 0.0;          // d ||f0||_1 T
    double margin = 1.2;
    double T = 0.0;
    double lhs() const { return mean_sup_entropy + mean_fisher; }
    double rhs() const { return initial_entropy + (F3_l1 * T + c_F1 + mass_term) * margin; }
    bool ok() const { return lhs() <= rhs(); }
};

// Trajectories must carry per-step records.
EntropyReport entropy_dissipation_check(const std::vector<Trajectory>& ensemble, const PhaseField& f0,
                                        const CovarianceFields& cov, double T, double margin = 1.2);

struct KineticProfile {
    std::vector<double> zeta;          // strictly increasing, positive
    std::vector<std::uint8_t> chi;     // [node][level], 1 when zeta < f
    std::vector<double> p;             // kinetic-measure mass per zeta bin
    std::size_t nodes = 0;

    std::uint8_t at(std::size_t node, std::size_t level) const { return chi[node * zeta.size() + level]; }
    // Layer-cake sum of chi over zeta with cells [zeta_{l-1}, zeta_l), zeta_{-1} = 0.
    double reconstruct(std::size_t node) const;
};

// Geometric levels between the smallest positive value and the maximum of f.
std::vector<double> default_zeta_grid(const PhaseField& f, int levels = 64);
KineticProfile kinetic_profile(const PhaseField& f, const std::vector<double>& zeta);

// Smooth test function phi(x, v) = prod_c X(x_c) B(v_c). X = 1 + a cos(k pi x / L_x + phase) is periodic;
// B = (p0 + p1 u + p2 u^2) * plateau(2|u| / v_half_width), u = v - v_center, vanishes for |u| >= v_half_width.
struct TestFunction {
    double v_center = 0.0;
    double v_half_width = 3.0;
    int kx = 1;
    double x_amplitude = 0.5;
    double x_phase = 0.0;
    double p0 = 1.0;
    double p1 = 0.0;
    double p2 = 0.0;

    struct Jet {
        double value = 0.0;
        double grad_x[2] = {0.0, 0.0};
        double grad_v[2] = {0.0, 0.0};
        double lap_v = 0.0;
    };
    Jet eval(const GridSpec& g, const double* x, const double* v) const;
    bool is_zero() const { return v_half_width <= 0.0; }
};

// Renormalization with S' = sin^2 bump on [a, b] and S(0) = 0.
struct Renormalizer {
    double a = 0.0;
    double b = 1.0;
    double S(double z) const;
    double Sp(double z) const;
    double Spp(double z) const;
};

struct ResidualSeries {
    std::vector<double> t;
    std::vector<double> residual;  // |left - right| at each stored step
    double max() const;
};

// Both residuals need a trajectory stored at every step (keep_every = 1) from `engine`.
ResidualSeries weak_residual(const SpdeEngine& engine, const Trajectory& tr, const TestFunction& phi,
                             double boundary_window = 0.1);
ResidualSeries kinetic_residual(const SpdeEngine& engine, const Trajectory& tr, const TestFunction& phi,
                                const Renormalizer& S, double boundary_window = 0.1);

struct StabilityReport {
    std::vector<double> t;
    std::vector<double> distance;  // L1 distance
    double sup_distance = 0.0;
    double growth_factor = 0.0;    // sup_t d(t) / d(0); 0 when d(0) = 0
};

StabilityReport l1_stability_test(const PhaseField& f0a, const PhaseField& f0b, const SchemeConfig& cfg,
                                  const NoiseBasis& basis, const DriftSpec& drift);

// Per-step records as CSV with a fixed column order and round-trip precision.
std::string records_csv(const std::vector<DiagnosticsRecord>& recs);

}  // namespace kfhd
