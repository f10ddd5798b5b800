#include "kfhd/kinetic_semigroup.hpp"

#include "kfhd/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace kfhd {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_nyquist(int m, int n) { return m == n / 2; }

// exp(-i k s) for a shift s on an axis, with the Nyquist mode kept real.
cplx shift_factor(int m, int n, double h, double s) {
    const double k = wavenumber(m, n, h);
    if (is_nyquist(m, n)) return {std::cos(k * s), 0.0};
    return std::polar(1.0, -k * s);
}

std::vector<int> all_dims(const GridSpec& g) {
    std::vector<int> dm;
    for (int a = 0; a < g.axis_count(); ++a) dm.push_back(g.axis_size(a));
    return dm;
}

}  // namespace

double kernel_density(double t, const double* x, const double* v, int d) {
    if (!(t > 0.0)) throw std::domain_error("kernel_density: t must be > 0");
    double q = 0.0;
    for (int c = 0; c < d; ++c) {
        const double a = 3.0 * x[c] + 2.0 * t * v[c];
        q += 3.0 * x[c] * x[c] + a * a;
    }
    const double norm = std::pow(std::sqrt(3.0) / (2.0 * kPi * t * t), d);
    return norm * std::exp(-q / (4.0 * t * t * t));
}

KernelJet kernel_jet(double t, const double* x, const double* v, int d) {
    KernelJet j;
    j.p = kernel_density(t, x, v, d);
    double gv2 = 0.0, vgx = 0.0;
    for (int c = 0; c < d; ++c) {
        const double dqv = (3.0 * x[c] + 2.0 * t * v[c]) / (t * t);
        const double dqx = (6.0 * x[c] + 3.0 * t * v[c]) / (t * t * t);
        gv2 += dqv * dqv;
        vgx += v[c] * dqx;
    }
    j.lap_v = j.p * (gv2 - 2.0 * d / t);
    j.v_grad_x = -j.p * vgx;
    return j;
}

PhaseField kernel_on_grid(double t, const GridSpec& g, bool sheared) {
    return sample_field(g, [&](const double* x, const double* v) {
        double y[2] = {x[0], g.d > 1 ? x[1] : 0.0};
        if (sheared)
            for (int c = 0; c < g.d; ++c) y[c] = x[c] - t * v[c];
        return kernel_density(t, y, v, g.d);
    });
}

double kernel_mass(double t, int d, int n, double width_sigmas) {
    if (!(t > 0.0)) throw std::domain_error("kernel_mass: t must be > 0");
    const double sx = std::sqrt(2.0 * t * t * t / 3.0), sv = std::sqrt(2.0 * t);
    const double Lx = width_sigmas * sx, Lv = width_sigmas * sv;
    const double hx = 2.0 * Lx / n, hv = 2.0 * Lv / n;
    // The density factorizes over components, so integrate one component and raise to d.
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = -Lx + (i + 0.5) * hx;
        for (int k = 0; k < n; ++k) {
            const double v = -Lv + (k + 0.5) * hv;
            s += kernel_density(t, &x, &v, 1);
        }
    }
    return std::pow(s * hx * hv, d);
}

PhaseField gamma_transport(double t, const PhaseField& f) {
    if (t == 0.0) return f;
    const GridSpec& g = f.grid;
    const std::size_t nvel = g.velocity_size(), nsp = g.spatial_size();
    const std::vector<int> xdims(g.d, g.n_x);
    PhaseField out(g);
    std::vector<cplx> buf(nsp);
    for (std::size_t iv = 0; iv < nvel; ++iv) {
        double shift[2] = {0.0, 0.0};
        for (int c = 0; c < g.d; ++c) shift[c] = t * g.coordinate(iv, g.d + c);
        for (std::size_t ix = 0; ix < nsp; ++ix) buf[ix] = f.values[ix * nvel + iv];
        fft_forward(buf, xdims);
        for (std::size_t ix = 0; ix < nsp; ++ix) {
            cplx fac(1.0, 0.0);
            for (int c = 0; c < g.d; ++c) fac *= shift_factor(g.coord(ix * nvel, c), g.n_x, g.h_x(), shift[c]);
            buf[ix] *= fac;
        }
        fft_inverse(buf, xdims);
        for (std::size_t ix = 0; ix < nsp; ++ix) out.values[ix * nvel + iv] = buf[ix].real();
    }
    return out;
}

double sheared_kernel_symbol(double t, const double* k, const double* eta, int d) {
    // Gamma_t p_t is the law of (X + tV, V); its characteristic function is exp(-Var/2).
    double q = 0.0;
    for (int c = 0; c < d; ++c) q += k[c] * k[c] * t * t * t / 3.0 + t * t * k[c] * eta[c] + t * eta[c] * eta[c];
    return std::exp(-q);
}

PhaseField apply_semigroup(double t, const PhaseField& f) {
    if (t < 0.0) throw std::domain_error("apply_semigroup: t must be >= 0");
    if (t == 0.0) return f;
    const GridSpec& g = f.grid;
    const PhaseField sh = gamma_transport(t, f);
    std::vector<cplx> spec(sh.values.begin(), sh.values.end());
    const auto dims = all_dims(g);
    fft_forward(spec, dims);
    const double t3 = t * t * t;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double diag = 0.0, cross_exp = 0.0;
        for (int c = 0; c < g.d; ++c) {
            const int mk = g.coord(i, c), me = g.coord(i, g.d + c);
            const double k = wavenumber(mk, g.n_x, g.h_x());
            const double e = wavenumber(me, g.n_v, g.h_v());
            diag += k * k * t3 / 3.0 + t * e * e;
            // A Nyquist index stands for both signs; average the odd cross term over them (log cosh).
            if (is_nyquist(mk, g.n_x) || is_nyquist(me, g.n_v)) {
                const double a = std::abs(t * t * k * e);
                cross_exp -= a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
            } else
                cross_exp += t * t * k * e;
        }
        spec[i] *= std::exp(-diag - cross_exp);
    }
    fft_inverse(spec, dims);
    PhaseField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = spec[i].real();
    return out;
}

PhaseField apply_semigroup_quadrature(double t, const PhaseField& f, int images) {
    if (t < 0.0) throw std::domain_error("apply_semigroup_quadrature: t must be >= 0");
    if (t == 0.0) return f;
    const GridSpec& g = f.grid;
    if (g.d != 1) throw std::invalid_argument("apply_semigroup_quadrature: d = 1 only");
    const PhaseField sh = gamma_transport(t, f);
    const int nx = g.n_x, nv = g.n_v;
    const double hx = g.h_x(), hv = g.h_v();
    const double Px = 2.0 * g.L_x, Pv = 2.0 * g.L_v;
    // Periodized sheared kernel on the displacement lattice.
    std::vector<double> q(static_cast<std::size_t>(nx) * nv, 0.0);
    for (int a = 0; a < nx; ++a) {
        for (int b = 0; b < nv; ++b) {
            const double y0 = signed_index(a, nx) * hx, w0 = signed_index(b, nv) * hv;
            double s = 0.0;
            for (int ix = -images; ix <= images; ++ix) {
                for (int iv = -images; iv <= images; ++iv) {
                    const double w = w0 + iv * Pv;
                    const double y = y0 + ix * Px - t * w;
                    s += kernel_density(t, &y, &w, 1);
                }
            }
            q[static_cast<std::size_t>(a) * nv + b] = s;
        }
    }
    PhaseField out(g);
    const double dz = g.dz();
    for (int i = 0; i < nx; ++i) {
        for (int k = 0; k < nv; ++k) {
            double s = 0.0;
            for (int i2 = 0; i2 < nx; ++i2) {
                const int a = ((i - i2) % nx + nx) % nx;
                for (int k2 = 0; k2 < nv; ++k2) {
                    const int b = ((k - k2) % nv + nv) % nv;
                    s += q[static_cast<std::size_t>(a) * nv + b] * sh.values[static_cast<std::size_t>(i2) * nv + k2];
                }
            }
            out.values[static_cast<std::size_t>(i) * nv + k] = s * dz;
        }
    }
    return out;
}

FpeResidual fpe_residual(double t, const GridSpec& g, double eps) {
    if (!(t > 0.0)) throw std::domain_error("fpe_residual: t must be > 0");
    if (!(eps > 0.0) || eps > 0.1 * t) throw std::invalid_argument("fpe_residual: eps too large relative to t");
    FpeResidual r;
    double x[2], v[2];
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int c = 0; c < g.d; ++c) {
            x[c] = g.coordinate(i, c);
            v[c] = g.coordinate(i, g.d + c);
        }
        const double dpdt = (kernel_density(t + eps, x, v, g.d) - kernel_density(t - eps, x, v, g.d)) / (2.0 * eps);
        const KernelJet j = kernel_jet(t, x, v, g.d);
        r.max_abs = std::max(r.max_abs, std::abs(dpdt - (j.lap_v + j.v_grad_x)));
        r.max_dpdt = std::max(r.max_dpdt, std::abs(dpdt));
    }
    return r;
}

PhasePoint char_flow(const PhasePoint& z0, double t, int d) {
    if (t < 0.0) throw std::domain_error("char_flow: t must be >= 0");
    PhasePoint z;
    const double e = std::exp(-t);
    for (int c = 0; c < d; ++c) {
        z.x[c] = z0.x[c] + (1.0 - e) * z0.v[c];
        z.v[c] = e * z0.v[c];
    }
    return z;
}

PhaseField translate_field(const PhaseField& f, const double* dx, const double* dv) {
    const GridSpec& g = f.grid;
    std::vector<cplx> spec(f.values.begin(), f.values.end());
    const auto dims = all_dims(g);
    fft_forward(spec, dims);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        cplx fac(1.0, 0.0);
        for (int c = 0; c < g.d; ++c) {
            // f(x + s) has symbol exp(+i k s).
            fac *= shift_factor(g.coord(i, c), g.n_x, g.h_x(), -dx[c]);
            fac *= shift_factor(g.coord(i, g.d + c), g.n_v, g.h_v(), -dv[c]);
        }
        spec[i] *= fac;
    }
    fft_inverse(spec, dims);
    PhaseField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = spec[i].real();
    return out;
}

PhaseField shift_field(const PhasePoint& z0, double t, const PhaseField& f) {
    const PhasePoint th = char_flow(z0, t, f.grid.d);
    return translate_field(f, th.x.data(), th.v.data());
}

std::vector<PhaseField> duhamel_mild(const PhaseField& u0, const std::vector<PhaseField>& forcing,
                                     const std::vector<PhaseField>& noise_terms, double dt, int steps) {
    if (steps < 0 || !(dt > 0.0)) throw std::invalid_argument("duhamel_mild: need steps >= 0 and dt > 0");
    if (!forcing.empty() && static_cast<int>(forcing.size()) != steps)
        throw std::invalid_argument("duhamel_mild: forcing trajectory length differs from step count");
    if (!noise_terms.empty() && static_cast<int>(noise_terms.size()) != steps)
        throw std::invalid_argument("duhamel_mild: noise trajectory length differs from step count");
    std::vector<PhaseField> w;
    if (!forcing.empty() || !noise_terms.empty()) {
        for (int m = 0; m < steps; ++m) {
            PhaseField wm(u0.grid);
            if (!forcing.empty())
                for (std::size_t i = 0; i < wm.size(); ++i) wm.values[i] += dt * forcing[m].values[i];
            if (!noise_terms.empty())
                for (std::size_t i = 0; i < wm.size(); ++i) wm.values[i] += noise_terms[m].values[i];
            w.push_back(std::move(wm));
        }
    }
    std::vector<PhaseField> traj{u0};
    for (int n = 1; n <= steps; ++n) {
        PhaseField un = apply_semigroup(n * dt, u0);
        for (int m = 0; m < static_cast<int>(w.size()) && m < n; ++m) {
            const PhaseField c = apply_semigroup((n - m) * dt, w[m]);
            for (std::size_t i = 0; i < un.size(); ++i) un.values[i] += c.values[i];
        }
        traj.push_back(std::move(un));
    }
    return traj;
}

std::vector<MomentRow> kernel_moment_scan(const GridSpec& g, int j_lo, int j_hi, double t, double alpha, double beta,
                                          int m, int n) {
    if (!(t > 0.0)) throw std::domain_error("kernel_moment_scan: t must be > 0");
    const AnisoDecomposition dec(g);
    if (j_hi > dec.j_max()) throw std::invalid_argument("kernel_moment_scan: grid too coarse for requested j");
    if (j_lo < -1 || j_lo > j_hi) throw std::invalid_argument("kernel_moment_scan: bad j range");
    const PhaseField q = kernel_on_grid(t, g, true);
    const auto base = dec.transform(q);
    std::vector<MomentRow> rows;
    double xi[4];
    for (int j = j_lo; j <= j_hi; ++j) {
        auto s = base;
        for (std::size_t i = 0; i < s.size(); ++i) {
            dec.frequency(i, xi);
            cplx mult = dec.multiplier(j, i);
            for (int r = 0; r < m; ++r) mult *= cplx(0.0, xi[0]);
            for (int r = 0; r < n; ++r) mult *= cplx(0.0, xi[g.d]);
            s[i] *= mult;
        }
        const PhaseField blk = dec.from_transform(std::move(s));
        double acc = 0.0;
        for (std::size_t i = 0; i < blk.size(); ++i) {
            double ax = 0.0, av = 0.0;
            for (int c = 0; c < g.d; ++c) {
                const double x = g.coordinate(i, c), v = g.coordinate(i, g.d + c);
                ax += x * x;
                av += v * v;
            }
            acc += std::pow(std::sqrt(ax), alpha) * std::pow(std::sqrt(av), beta) * std::abs(blk.values[i]);
        }
        rows.push_back({j, t, acc * g.dz()});
    }
    return rows;
}

}  // namespace kfhd
