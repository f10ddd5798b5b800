#pragma once

#include "kfhd/aniso_besov.hpp"
#include "kfhd/phase_grid.hpp"

#include <array>
#include <vector>

namespace kfhd {

// Transition density of (X_t, V_t) = (-sqrt2 int B, sqrt2 B), normalized to unit mass.
double kernel_density(double t, const double* x, const double* v, int d);
inline double kernel_density(double t, double x, double v) { return kernel_density(t, &x, &v, 1); }

// p_t and the pieces of its Fokker-Planck generator, from the closed form.
struct KernelJet {
    double p = 0.0;
    double lap_v = 0.0;     // Delta_v p
    double v_grad_x = 0.0;  // v . grad_x p
};
KernelJet kernel_jet(double t, const double* x, const double* v, int d);

// Kernel sampled on a grid, either plain or sheared (Gamma_t p_t).
PhaseField kernel_on_grid(double t, const GridSpec& g, bool sheared);

// Midpoint quadrature of p_t on a box scaled to the kernel's spread.
double kernel_mass(double t, int d, int n = 256, double width_sigmas = 12.0);

PhaseField gamma_transport(double t, const PhaseField& f);

// Fourier symbol of Gamma_t p_t at frequency (k, eta).
double sheared_kernel_symbol(double t, const double* k, const double* eta, int d);

PhaseField apply_semigroup(double t, const PhaseField& f);

// Direct quadrature of the sheared, periodized kernel against the sheared field. Slow; a
// reference for the spectral path on small grids.
PhaseField apply_semigroup_quadrature(double t, const PhaseField& f, int images = 2);

struct FpeResidual {
    double max_abs = 0.0;   // max |dp/dt - (Delta_v + v.grad_x) p|
    double max_dpdt = 0.0;  // max |dp/dt| from the same difference
    double relative() const { return max_dpdt > 0.0 ? max_abs / max_dpdt : 0.0; }
};

FpeResidual fpe_residual(double t, const GridSpec& g, double eps);

struct PhasePoint {
    std::array<double, 2> x{0.0, 0.0};
    std::array<double, 2> v{0.0, 0.0};
};

PhasePoint char_flow(const PhasePoint& z0, double t, int d = 1);

// (tau f)(x, v) = f(x + theta_1, v + theta_2) by Fourier interpolation in every axis.
PhaseField shift_field(const PhasePoint& z0, double t, const PhaseField& f);
PhaseField translate_field(const PhaseField& f, const double* dx, const double* dv);

// u_n = P_{t_n} u0 + sum_{m<n} P_{t_n - s_m}(dt g_m + eta_m), with eta_m the already assembled
// stochastic increment h_m div_v(g_m dW_m). Either trajectory may be empty.
std::vector<PhaseField> duhamel_mild(const PhaseField& u0, const std::vector<PhaseField>& forcing,
                                     const std::vector<PhaseField>& noise_terms, double dt, int steps);

struct MomentRow {
    int j = 0;
    double t = 0.0;
    double I = 0.0;
};

// I_j(t) = int |x|^alpha |v|^beta |d_x^m d_v^n R_j Gamma_t p_t| dz on the given grid.
std::vector<MomentRow> kernel_moment_scan(const GridSpec& g, int j_lo, int j_hi, double t, double alpha, double beta,
                                          int m, int n);

}  // namespace kfhd
