#pragma once

#include "kfhd/fft.hpp"
#include "kfhd/phase_grid.hpp"

#include <vector>

namespace kfhd {

// Smooth bump in r = |xi|_theta: 1 on [0,1], 0 on [4/3, inf).
double chi_theta(double r);

// |xi|_theta = |xi_x|^{1/3} + |xi_v| with Euclidean norms on each block.
double theta_norm(const double* xi_x, const double* xi_v, int d);

// phi_j(r) for j >= -1 on an unbounded ring ladder (no folding).
double ring_multiplier(int j, double r);

class AnisoDecomposition {
public:
    explicit AnisoDecomposition(const GridSpec& g);

    const GridSpec& grid() const { return grid_; }
    int j_max() const { return j_max_; }
    double nyquist_radius() const { return r_nyquist_; }
    // Multiplier on the grid's frequency node i (flat, FFT order); the last ring absorbs everything above it.
    double multiplier(int j, std::size_t i) const;
    double multiplier_at(int j, double r) const;
    const std::vector<double>& radii() const { return radius_; }

    std::vector<cplx> transform(const PhaseField& f) const;
    PhaseField from_transform(std::vector<cplx> spec) const;

    PhaseField block(const PhaseField& f, int j) const;
    std::vector<PhaseField> all_blocks(const PhaseField& f) const;

    // Frequency vector of node i: xi_x in [0,d), xi_v in [d,2d).
    void frequency(std::size_t i, double* xi) const;
    std::vector<int> dims() const;

private:
    GridSpec grid_;
    int j_max_ = 0;
    double r_nyquist_ = 0.0;
    std::vector<double> radius_;
};

struct BesovReport {
    double s = 0.0;
    double p = 2.0;
    std::vector<int> j;
    std::vector<double> block_norms;
    double norm = 0.0;
};

BesovReport besov_norm(const AnisoDecomposition& dec, const PhaseField& f, double s, double p);

// ||d_x^{k1} d_v^{k2} R_j f||_q / (2^{j(3k1+k2+4d/p-4d/q)} ||R_j f||_p); 0 for a zero block.
double bernstein_check(const AnisoDecomposition& dec, const PhaseField& f, int j, int k1, int k2, double p, double q);

std::vector<int> theta_set(double t, int j, int ell_max);

// <R_j f, Gamma_t R_ell g> evaluated in frequency space. Shifted frequencies that leave the
// grid band contribute nothing when t is commensurate with the grid; otherwise the block of g
// is transformed directly at the off-grid velocity frequency.
double shear_inner_product(const AnisoDecomposition& dec, const PhaseField& f, const PhaseField& g, double t, int j,
                           int ell);

}  // namespace kfhd
