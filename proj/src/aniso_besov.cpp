#include "kfhd/aniso_besov.hpp"

#include <cmath>
#include <stdexcept>

namespace kfhd {

namespace {

constexpr double kPi = 3.14159265358979323846;

double smooth_step01(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

}  // namespace

double chi_theta(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 4.0 / 3.0) return 0.0;
    return smooth_step01((4.0 / 3.0 - r) * 3.0);
}

double theta_norm(const double* xi_x, const double* xi_v, int d) {
    double ax = 0.0, av = 0.0;
    for (int c = 0; c < d; ++c) {
        ax += xi_x[c] * xi_x[c];
        av += xi_v[c] * xi_v[c];
    }
    return std::cbrt(std::sqrt(ax)) + std::sqrt(av);
}

double ring_multiplier(int j, double r) {
    if (j < -1) throw std::out_of_range("ring index must be >= -1");
    if (j == -1) return chi_theta(r);
    return chi_theta(std::ldexp(r, -(j + 1))) - chi_theta(std::ldexp(r, -j));
}

AnisoDecomposition::AnisoDecomposition(const GridSpec& g) : grid_(g) {
    r_nyquist_ = std::cbrt(kPi / g.h_x()) + kPi / g.h_v();
    j_max_ = static_cast<int>(std::floor(std::log2(r_nyquist_))) - 1;
    if (j_max_ < 1) throw std::invalid_argument("aniso decomposition: grid too small for j >= 1");
    radius_.resize(g.size());
    double xi[4];
    for (std::size_t i = 0; i < g.size(); ++i) {
        frequency(i, xi);
        radius_[i] = theta_norm(xi, xi + g.d, g.d);
    }
}

void AnisoDecomposition::frequency(std::size_t i, double* xi) const {
    for (int a = 0; a < grid_.axis_count(); ++a)
        xi[a] = wavenumber(grid_.coord(i, a), grid_.axis_size(a), grid_.axis_spacing(a));
}

std::vector<int> AnisoDecomposition::dims() const {
    std::vector<int> dm;
    for (int a = 0; a < grid_.axis_count(); ++a) dm.push_back(grid_.axis_size(a));
    return dm;
}

double AnisoDecomposition::multiplier_at(int j, double r) const {
    if (j < -1 || j > j_max_) throw std::out_of_range("block index " + std::to_string(j) + " out of range");
    if (j == j_max_) return 1.0 - chi_theta(std::ldexp(r, -j));
    return ring_multiplier(j, r);
}

double AnisoDecomposition::multiplier(int j, std::size_t i) const { return multiplier_at(j, radius_[i]); }

std::vector<cplx> AnisoDecomposition::transform(const PhaseField& f) const {
    require_same_grid(grid_, f.grid, "aniso transform");
    std::vector<cplx> spec(f.values.begin(), f.values.end());
    fft_forward(spec, dims());
    return spec;
}

PhaseField AnisoDecomposition::from_transform(std::vector<cplx> spec) const {
    fft_inverse(spec, dims());
    PhaseField out(grid_);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = spec[i].real();
    return out;
}

PhaseField AnisoDecomposition::block(const PhaseField& f, int j) const {
    auto spec = transform(f);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= multiplier(j, i);
    return from_transform(std::move(spec));
}

std::vector<PhaseField> AnisoDecomposition::all_blocks(const PhaseField& f) const {
    const auto spec = transform(f);
    std::vector<PhaseField> out;
    for (int j = -1; j <= j_max_; ++j) {
        auto s = spec;
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= multiplier(j, i);
        out.push_back(from_transform(std::move(s)));
    }
    return out;
}

BesovReport besov_norm(const AnisoDecomposition& dec, const PhaseField& f, double s, double p) {
    BesovReport rep;
    rep.s = s;
    rep.p = p;
    const auto blocks = dec.all_blocks(f);
    for (int j = -1; j <= dec.j_max(); ++j) {
        const double bn = lp_norm(blocks[j + 1], p);
        rep.j.push_back(j);
        rep.block_norms.push_back(bn);
        rep.norm = std::max(rep.norm, std::pow(2.0, s * j) * bn);
    }
    return rep;
}

double bernstein_check(const AnisoDecomposition& dec, const PhaseField& f, int j, int k1, int k2, double p, double q) {
    if (q < p) throw std::invalid_argument("bernstein_check: requires p <= q");
    if (k1 < 0 || k2 < 0) throw std::invalid_argument("bernstein_check: derivative orders must be >= 0");
    const GridSpec& g = dec.grid();
    const int d = g.d;
    auto spec = dec.transform(f);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= dec.multiplier(j, i);
    const PhaseField blk = dec.from_transform(spec);
    const double denom_norm = lp_norm(blk, p);
    if (denom_norm == 0.0) return 0.0;

    // Every ordered choice of component for each derivative; pointwise Euclidean norm of the tensor.
    const int total = k1 + k2;
    long long combos = 1;
    for (int r = 0; r < total; ++r) combos *= d;
    PhaseField mag(g);
    double xi[4];
    for (long long c = 0; c < combos; ++c) {
        std::vector<cplx> s = spec;
        long long code = c;
        std::vector<int> axes;
        for (int r = 0; r < total; ++r) {
            const int comp = static_cast<int>(code % d);
            code /= d;
            axes.push_back(r < k1 ? comp : d + comp);
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            dec.frequency(i, xi);
            cplx m(1.0, 0.0);
            for (int a : axes) m *= cplx(0.0, xi[a]);
            s[i] *= m;
        }
        const PhaseField part = dec.from_transform(std::move(s));
        for (std::size_t i = 0; i < mag.size(); ++i) mag.values[i] += part.values[i] * part.values[i];
    }
    for (auto& x : mag.values) x = std::sqrt(x);
    const double expo = 3.0 * k1 + k2 + 4.0 * d / p - (std::isinf(q) ? 0.0 : 4.0 * d / q);
    return lp_norm(mag, q) / (std::pow(2.0, j * expo) * denom_norm);
}

std::vector<int> theta_set(double t, int j, int ell_max) {
    if (t < 0.0) throw std::invalid_argument("theta_set: t must be >= 0");
    if (j < 1) throw std::invalid_argument("theta_set: j must be >= 1");
    std::vector<int> out;
    const double a = std::ldexp(1.0, j);
    for (int l = 0; l <= ell_max; ++l) {
        const double b = std::ldexp(1.0, l);
        if (b <= 16.0 * (a + t * a * a * a) && a <= 16.0 * (b + t * b * b * b)) out.push_back(l);
    }
    return out;
}

double shear_inner_product(const AnisoDecomposition& dec, const PhaseField& f, const PhaseField& g, double t, int j,
                           int ell) {
    const GridSpec& gr = dec.grid();
    const int d = gr.d;
    const std::size_t nvel = gr.velocity_size();
    const std::size_t nsp = gr.spatial_size();
    auto F = dec.transform(f);
    auto G = dec.transform(g);
    for (std::size_t i = 0; i < F.size(); ++i) {
        F[i] *= dec.multiplier(j, i);
        G[i] *= dec.multiplier(ell, i);
    }
    const double deta = kPi / gr.L_v;

    bool commensurate = true;
    for (std::size_t ix = 0; ix < nsp && commensurate; ++ix) {
        for (int c = 0; c < d; ++c) {
            const double k = wavenumber(gr.coord(ix * nvel, c), gr.n_x, gr.h_x());
            const double sh = t * k / deta;
            if (std::abs(sh - std::round(sh)) > 1e-9 * std::max(1.0, std::abs(sh))) commensurate = false;
        }
    }

    cplx acc(0.0, 0.0);
    if (commensurate) {
        for (std::size_t ix = 0; ix < nsp; ++ix) {
            int shift[2] = {0, 0};
            double kv0 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double k = wavenumber(gr.coord(ix * nvel, c), gr.n_x, gr.h_x());
                shift[c] = static_cast<int>(std::lround(t * k / deta));
                kv0 += k * t * (-gr.L_v);
            }
            const cplx origin_phase = std::polar(1.0, kv0);
            for (std::size_t iv = 0; iv < nvel; ++iv) {
                const std::size_t i = ix * nvel + iv;
                if (F[i] == cplx(0.0, 0.0)) continue;
                std::size_t target = 0;
                bool inside = true;
                for (int c = 0; c < d; ++c) {
                    const int m = signed_index(gr.coord(i, d + c), gr.n_v) + shift[c];
                    if (m < -gr.n_v / 2 || m >= gr.n_v / 2) {
                        inside = false;
                        break;
                    }
                    const int idx = (m + gr.n_v) % gr.n_v;
                    target = target * gr.n_v + idx;
                }
                if (!inside) continue;
                acc += F[i] * std::conj(G[ix * nvel + target]) * origin_phase;
            }
        }
    } else {
        // Velocity-space representation of the g block per x-frequency, then a direct
        // transform at the sheared frequency.
        std::vector<int> vdims(d, gr.n_v);
        for (std::size_t ix = 0; ix < nsp; ++ix) {
            std::vector<cplx> slice(G.begin() + ix * nvel, G.begin() + (ix + 1) * nvel);
            fft_inverse(slice, vdims);
            double k[2] = {0.0, 0.0};
            double kv0 = 0.0;
            for (int c = 0; c < d; ++c) {
                k[c] = wavenumber(gr.coord(ix * nvel, c), gr.n_x, gr.h_x());
                kv0 += k[c] * t * (-gr.L_v);
            }
            const cplx origin_phase = std::polar(1.0, kv0);
            for (std::size_t iv = 0; iv < nvel; ++iv) {
                const std::size_t i = ix * nvel + iv;
                if (F[i] == cplx(0.0, 0.0)) continue;
                double omega[2] = {0.0, 0.0};
                for (int c = 0; c < d; ++c)
                    omega[c] = wavenumber(gr.coord(i, d + c), gr.n_v, gr.h_v()) + t * k[c];
                cplx ghat(0.0, 0.0);
                for (std::size_t jv = 0; jv < nvel; ++jv) {
                    double ph = 0.0;
                    std::size_t rem = jv;
                    for (int c = d - 1; c >= 0; --c) {
                        const int n = static_cast<int>(rem % gr.n_v);
                        rem /= gr.n_v;
                        ph += omega[c] * n * gr.h_v();
                    }
                    ghat += slice[jv] * std::polar(1.0, -ph);
                }
                acc += F[i] * std::conj(ghat) * origin_phase;
            }
        }
    }
    return acc.real() * gr.dz() / static_cast<double>(gr.size());
}

}  // namespace kfhd
