#include "kfhd/coefficient_kit.hpp"

#include <cmath>
#include <stdexcept>

namespace kfhd {

namespace {

void require_nonneg(double z, const char* what) {
    if (!(z >= 0.0)) throw std::domain_error(std::string(what) + ": argument must be >= 0");
}

// Ramp on u in [0,1]: P(0)=P'(0)=0, matches sqrt(u) to second order at u=1.
inline double ramp(double u) { return u * u * (35.0 / 8.0 + u * (-21.0 / 4.0 + u * (15.0 / 8.0))); }
inline double ramp_d(double u) { return u * (35.0 / 4.0 + u * (-63.0 / 4.0 + u * (15.0 / 2.0))); }
inline double ramp_dd(double u) { return 35.0 / 4.0 + u * (-63.0 / 2.0 + u * (45.0 / 2.0)); }

// Taper of sigma' on u in [0,1]: g(0)=1, g'(0)=-1/2, g(1)=g'(1)=0.
inline double taper(double u) { return 1.0 + u * (-0.5 + u * (-2.0 + u * 1.5)); }
inline double taper_d(double u) { return -0.5 + u * (-4.0 + u * 4.5); }
inline double taper_int(double u) { return u * (1.0 + u * (-0.25 + u * (-2.0 / 3.0 + u * 0.375))); }

}  // namespace

CoefficientFamily::CoefficientFamily(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("coeff.n must be a positive integer");
    eps_ = 1.0 / n;
    M_ = static_cast<double>(n);
    sqrt_eps_ = std::sqrt(eps_);
    sqrt_M_ = std::sqrt(M_);
}

void CoefficientFamily::eval(double z, double& s, double& sp, double& spp) const {
    if (z < eps_) {
        const double u = z / eps_;
        s = sqrt_eps_ * ramp(u);
        sp = ramp_d(u) / sqrt_eps_;
        spp = ramp_dd(u) / (sqrt_eps_ * eps_);
        if (z == 0.0) spp = ramp_dd(0.0) / (sqrt_eps_ * eps_);
    } else if (z <= M_) {
        s = std::sqrt(z);
        sp = 0.5 / s;
        spp = -0.25 / (s * z);
    } else if (z < 2.0 * M_) {
        const double u = (z - M_) / M_;
        s = sqrt_M_ * (1.0 + 0.5 * taper_int(u));
        sp = taper(u) / (2.0 * sqrt_M_);
        spp = taper_d(u) / (2.0 * sqrt_M_ * M_);
    } else {
        s = sqrt_M_ * (1.0 + 0.5 * taper_int(1.0));
        sp = 0.0;
        spp = 0.0;
    }
}

double CoefficientFamily::sigma(double z) const {
    require_nonneg(z, "sigma_n");
    double s, sp, spp;
    eval(z, s, sp, spp);
    return s;
}

double CoefficientFamily::sigma_prime(double z) const {
    require_nonneg(z, "sigma_n_prime");
    double s, sp, spp;
    eval(z, s, sp, spp);
    return sp;
}

double CoefficientFamily::sigma_second(double z) const {
    require_nonneg(z, "sigma_n_second");
    double s, sp, spp;
    eval(z, s, sp, spp);
    return spp;
}

double CoefficientFamily::sigma_sigma_prime_deriv(double z) const {
    require_nonneg(z, "sigma_sigma_prime_deriv");
    double s, sp, spp;
    eval(z, s, sp, spp);
    return sp * sp + s * spp;
}

void TruncationKit::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("coeff.delta must lie in (0,1)");
    if (!(beta > 0.0) || !(M > 0.0) || !(R1 > 0.0) || !(R2 > 0.0))
        throw std::invalid_argument("cutoff parameters must be positive");
}

double TruncationKit::psi(double z) const {
    require_nonneg(z, "psi_delta");
    if (z <= 0.5 * delta) return 0.0;
    if (z >= delta) return 1.0;
    const double u = (z - 0.5 * delta) / (0.5 * delta);
    return u * u * (3.0 - 2.0 * u);
}

double TruncationKit::psi_prime(double z) const {
    require_nonneg(z, "psi_delta");
    if (z <= 0.5 * delta || z >= delta) return 0.0;
    const double u = (z - 0.5 * delta) / (0.5 * delta);
    return 6.0 * u * (1.0 - u) / (0.5 * delta);
}

double TruncationKit::psi_second(double z) const {
    require_nonneg(z, "psi_delta");
    if (z <= 0.5 * delta || z >= delta) return 0.0;
    const double u = (z - 0.5 * delta) / (0.5 * delta);
    const double w = 0.5 * delta;
    return (6.0 - 12.0 * u) / (w * w);
}

double TruncationKit::h_delta(double z) const { return psi(z) * z; }
double TruncationKit::h_delta_prime(double z) const { return psi_prime(z) * z + psi(z); }
double TruncationKit::h_delta_second(double z) const { return psi_second(z) * z + 2.0 * psi_prime(z); }

double TruncationKit::phi_beta(double z) const {
    if (z <= 0.5 * beta) return 0.0;
    if (z >= beta) return 1.0;
    return (2.0 / beta) * (z - 0.5 * beta);
}

double TruncationKit::phi_beta_prime(double z) const {
    return (z > 0.5 * beta && z < beta) ? 2.0 / beta : 0.0;
}

double TruncationKit::zeta_M(double z) const {
    if (z <= M) return 1.0;
    if (z >= M + 1.0) return 0.0;
    return M + 1.0 - z;
}

double TruncationKit::zeta_M_prime(double z) const { return (z > M && z < M + 1.0) ? -1.0 : 0.0; }

double TruncationKit::alpha_R(const double* x, const double* v, int d) const {
    double rx = 0.0, rv = 0.0;
    for (int c = 0; c < d; ++c) {
        rx += x[c] * x[c];
        rv += v[c] * v[c];
    }
    return plateau(std::sqrt(rx) / R1) * plateau(std::sqrt(rv) / R2);
}

namespace {

// Standard smooth transition: 0 for s <= 0, 1 for s >= 1.
double bump_exp(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

}  // namespace

double plateau(double r) {
    const double s = 2.0 - r;
    if (s >= 1.0) return 1.0;
    if (s <= 0.0) return 0.0;
    const double a = bump_exp(s), b = bump_exp(1.0 - s);
    return a / (a + b);
}

double plateau_prime(double r) {
    const double s = 2.0 - r;
    if (s >= 1.0 || s <= 0.0) return 0.0;
    const double a = bump_exp(s), b = bump_exp(1.0 - s);
    const double da = a / (s * s), db = -b / ((1.0 - s) * (1.0 - s));
    // d/ds [a/(a+b)], then ds/dr = -1
    return -(da * b - a * db) / ((a + b) * (a + b));
}

double plateau_second(double r) {
    const double s = 2.0 - r;
    if (s >= 1.0 || s <= 0.0) return 0.0;
    const double a = bump_exp(s), b = bump_exp(1.0 - s);
    const double t = 1.0 - s;
    const double da = a / (s * s);
    const double dda = a * (1.0 - 2.0 * s) / (s * s * s * s);
    const double db = -b / (t * t);
    const double ddb = b * (1.0 - 2.0 * t) / (t * t * t * t);
    const double num = da * b - a * db;
    const double dnum = dda * b - a * ddb;
    const double den = a + b;
    const double dden = da + db;
    return (dnum * den - 2.0 * num * dden) / (den * den * den);
}

double entropy_Psi(double z) {
    require_nonneg(z, "entropy_Psi");
    if (z == 0.0) return 0.0;
    return z * std::log(z) - z;
}

}  // namespace kfhd
