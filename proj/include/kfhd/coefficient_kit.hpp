#pragma once

namespace kfhd {

// Regularized square root: a C^2 polynomial ramp on [0, 1/n], exactly sqrt on [1/n, n],
// flattened to a constant beyond 2n. sigma' therefore has support in [0, 2n].
class CoefficientFamily {
public:
    explicit CoefficientFamily(int n);

    int n() const { return n_; }
    double eps() const { return eps_; }
    double M() const { return M_; }

    double sigma(double z) const;
    double sigma_prime(double z) const;
    double sigma_second(double z) const;
    double sigma_sigma_prime(double z) const { return sigma(z) * sigma_prime(z); }
    // (sigma sigma')' = sigma'^2 + sigma sigma''
    double sigma_sigma_prime_deriv(double z) const;

    // Evaluates sigma, sigma' and sigma'' together; avoids repeated branching in hot loops.
    void eval(double z, double& s, double& sp, double& spp) const;

private:
    int n_;
    double eps_;
    double M_;
    double sqrt_eps_;
    double sqrt_M_;
};

struct TruncationKit {
    double delta = 0.01;
    double beta = 0.1;
    double M = 10.0;
    double R1 = 1.0;
    double R2 = 1.0;

    void validate() const;

    double psi(double z) const;
    double psi_prime(double z) const;
    double psi_second(double z) const;

    double h_delta(double z) const;
    double h_delta_prime(double z) const;
    double h_delta_second(double z) const;

    double phi_beta(double z) const;
    double phi_beta_prime(double z) const;
    double zeta_M(double z) const;
    double zeta_M_prime(double z) const;

    // alpha_R(x, v) = a(|x|/R1) a(|v|/R2) with a smooth plateau, 1 on [0,1] and 0 beyond 2.
    double alpha_R(const double* x, const double* v, int d) const;
};

// C-infinity plateau profile: 1 for r <= 1, 0 for r >= 2.
double plateau(double r);
double plateau_prime(double r);
double plateau_second(double r);

// Psi(z) = z log z - z with Psi(0) = 0.
double entropy_Psi(double z);

}  // namespace kfhd
