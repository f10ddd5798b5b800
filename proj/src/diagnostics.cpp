#include "kfhd/diagnostics.hpp"

#include "kfhd/coefficient_kit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace kfhd {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_window(const GridSpec& g, const TestFunction& phi, double window) {
    if (phi.is_zero()) return;
    const double edge = g.L_v * (1.0 - window);
    if (std::abs(phi.v_center) + phi.v_half_width > edge)
        throw std::invalid_argument("test function support reaches the velocity boundary window");
}

void check_trajectory(const SpdeEngine& e, const Trajectory& tr) {
    if (static_cast<long long>(tr.fields.size()) != tr.steps + 1 || tr.steps != e.steps())
        throw std::invalid_argument("residual needs a trajectory stored at every step of this engine");
    for (std::size_t i = 0; i < tr.kept_steps.size(); ++i)
        if (tr.kept_steps[i] != static_cast<long long>(i))
            throw std::invalid_argument("residual needs a trajectory stored at every step of this engine");
}

struct JetTable {
    std::vector<double> phi, lap;
    std::vector<std::vector<double>> gx, gv;
};

JetTable tabulate(const GridSpec& g, const TestFunction& tf) {
    JetTable t;
    const std::size_t N = g.size();
    t.phi.assign(N, 0.0);
    t.lap.assign(N, 0.0);
    t.gx.assign(g.d, std::vector<double>(N, 0.0));
    t.gv.assign(g.d, std::vector<double>(N, 0.0));
    if (tf.is_zero()) return t;
    double x[2], v[2];
    for (std::size_t i = 0; i < N; ++i) {
        for (int c = 0; c < g.d; ++c) {
            x[c] = g.coordinate(i, c);
            v[c] = g.coordinate(i, g.d + c);
        }
        const auto j = tf.eval(g, x, v);
        t.phi[i] = j.value;
        t.lap[i] = j.lap_v;
        for (int c = 0; c < g.d; ++c) {
            t.gx[c][i] = j.grad_x[c];
            t.gv[c][i] = j.grad_v[c];
        }
    }
    return t;
}

}  // namespace

DiagnosticsRecord record(const PhaseField& f, double t, double clipped, double boundary_window) {
    const GridSpec& g = f.grid;
    DiagnosticsRecord r;
    r.t = t;
    r.clipped = clipped;
    const double dz = g.dz();
    const std::size_t N = f.size();
    if (N == 0) return r;
    PhaseField root(g);
    double mass = 0.0, ent = 0.0, en = 0.0, mn = std::numeric_limits<double>::infinity();
    double total_abs = 0.0, edge_abs = 0.0;
    const double edge = g.L_v * (1.0 - boundary_window);
    for (std::size_t i = 0; i < N; ++i) {
        const double x = f.values[i];
        mass += x;
        mn = std::min(mn, x);
        ent += entropy_Psi(std::max(x, 0.0));
        en += x * x;
        root.values[i] = std::sqrt(std::max(x, 0.0) + kFisherFloor);
        total_abs += std::abs(x);
        bool near = false;
        for (int c = 0; c < g.d; ++c) near = near || std::abs(g.coordinate(i, g.d + c)) >= edge;
        if (near) edge_abs += std::abs(x);
    }
    double fisher = 0.0, genergy = 0.0;
    const VectorPhaseField gr = grad_v(root);
    const VectorPhaseField gf = grad_v(f);
    for (int c = 0; c < g.d; ++c)
        for (std::size_t i = 0; i < N; ++i) {
            fisher += gr[c].values[i] * gr[c].values[i];
            genergy += gf[c].values[i] * gf[c].values[i];
        }
    r.mass = mass * dz;
    r.min = mn;
    r.entropy = ent * dz;
    r.energy = en * dz;
    r.fisher = fisher * dz;
    r.grad_energy = genergy * dz;
    r.boundary_fraction = total_abs > 0.0 ? edge_abs / total_abs : 0.0;
    return r;
}

EntropyReport entropy_dissipation_check(const std::vector<Trajectory>& ensemble, const PhaseField& f0,
                                        const CovarianceFields& cov, double T, double margin) {
    if (ensemble.size() < 16) throw std::invalid_argument("entropy check needs at least 16 realizations");
    EntropyReport rep;
    rep.members = static_cast<int>(ensemble.size());
    rep.margin = margin;
    rep.T = T;
    const GridSpec& g = f0.grid;
    for (const auto& tr : ensemble) {
        if (tr.records.size() != static_cast<std::size_t>(tr.steps) + 1)
            throw std::invalid_argument("entropy check needs per-step records");
        double sup = -std::numeric_limits<double>::infinity(), fis = 0.0;
        for (std::size_t n = 0; n < tr.records.size(); ++n) {
            sup = std::max(sup, tr.records[n].entropy);
            if (n + 1 < tr.records.size()) fis += tr.dt * tr.records[n].fisher;
        }
        rep.mean_sup_entropy += sup;
        rep.mean_fisher += fis;
    }
    rep.mean_sup_entropy /= rep.members;
    rep.mean_fisher /= rep.members;
    rep.initial_entropy = record(f0).entropy;
    double F1_sup = 0.0, F3 = 0.0;
    for (double x : cov.F1.values) F1_sup = std::max(F1_sup, std::abs(x));
    for (double x : cov.F3.values) F3 += std::abs(x);
    rep.F3_l1 = F3 * g.dz();
    rep.c_F1 = 0.5 * kBdgConstant * kBdgConstant * F1_sup;
    rep.mass_term = g.d * lp_norm(f0, 1.0) * T;
    return rep;
}

double KineticProfile::reconstruct(std::size_t node) const {
    double s = 0.0, prev = 0.0;
    for (std::size_t l = 0; l < zeta.size(); ++l) {
        if (at(node, l)) s += zeta[l] - prev;
        prev = zeta[l];
    }
    return s;
}

std::vector<double> default_zeta_grid(const PhaseField& f, int levels) {
    if (levels < 2) throw std::invalid_argument("zeta grid needs at least 2 levels");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : f.values)
        if (x > 0.0) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!(hi > 0.0)) return {1.0, 2.0};
    if (lo == hi) lo = 0.5 * hi;
    std::vector<double> z(static_cast<std::size_t>(levels));
    const double r = std::log(hi / lo) / (levels - 1);
    for (int l = 0; l < levels; ++l) z[static_cast<std::size_t>(l)] = lo * std::exp(r * l);
    z.back() = hi;
    return z;
}

KineticProfile kinetic_profile(const PhaseField& f, const std::vector<double>& zeta) {
    if (zeta.empty() || !(zeta.front() > 0.0)) throw std::invalid_argument("zeta grid must be positive");
    for (std::size_t l = 1; l < zeta.size(); ++l)
        if (!(zeta[l] > zeta[l - 1])) throw std::invalid_argument("zeta grid must be strictly increasing");
    KineticProfile kp;
    kp.zeta = zeta;
    kp.nodes = f.size();
    const std::size_t L = zeta.size();
    kp.chi.assign(kp.nodes * L, 0);
    kp.p.assign(L, 0.0);
    const VectorPhaseField gf = grad_v(f);
    const double dz = f.grid.dz();
    for (std::size_t i = 0; i < kp.nodes; ++i) {
        const double x = f.values[i];
        for (std::size_t l = 0; l < L && zeta[l] < x; ++l) kp.chi[i * L + l] = 1;
        // Bin l covers [zeta_{l-1}, zeta_l); values beyond the top level land in the last bin.
        const std::size_t bin = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(zeta.begin(), zeta.end(), x) - zeta.begin()), L - 1);
        double g2 = 0.0;
        for (const auto& c : gf) g2 += c.values[i] * c.values[i];
        kp.p[bin] += g2 * dz;
    }
    return kp;
}

TestFunction::Jet TestFunction::eval(const GridSpec& g, const double* x, const double* v) const {
    Jet j;
    if (is_zero()) return j;
    const int d = g.d;
    double X[2], Xp[2], B[2], Bp[2], Bpp[2];
    const double kx_w = kPi * kx / g.L_x;
    const double scale = 2.0 / v_half_width;
    for (int c = 0; c < d; ++c) {
        const double arg = kx_w * x[c] + x_phase;
        X[c] = 1.0 + x_amplitude * std::cos(arg);
        Xp[c] = -x_amplitude * kx_w * std::sin(arg);
        const double u = v[c] - v_center, au = std::abs(u);
        if (au >= v_half_width) {
            B[c] = Bp[c] = Bpp[c] = 0.0;
            continue;
        }
        const double P = p0 + p1 * u + p2 * u * u, Pp = p1 + 2.0 * p2 * u, Ppp = 2.0 * p2;
        const double sg = u < 0.0 ? -1.0 : 1.0;
        const double W = plateau(scale * au), Wp = sg * scale * plateau_prime(scale * au),
                     Wpp = scale * scale * plateau_second(scale * au);
        B[c] = P * W;
        Bp[c] = Pp * W + P * Wp;
        Bpp[c] = Ppp * W + 2.0 * Pp * Wp + P * Wpp;
    }
    auto prod_except = [&](int skip, bool use_x_deriv, bool use_v_deriv, int vd) {
        double p = 1.0;
        for (int c = 0; c < d; ++c) {
            const double xf = (c == skip && use_x_deriv) ? Xp[c] : X[c];
            const double vf = (c == skip && use_v_deriv) ? (vd == 1 ? Bp[c] : Bpp[c]) : B[c];
            p *= xf * vf;
        }
        return p;
    };
    j.value = prod_except(-1, false, false, 0);
    for (int c = 0; c < d; ++c) {
        j.grad_x[c] = prod_except(c, true, false, 0);
        j.grad_v[c] = prod_except(c, false, true, 1);
        j.lap_v += prod_except(c, false, true, 2);
    }
    return j;
}

double Renormalizer::S(double z) const {
    if (z <= a) return 0.0;
    const double w = b - a;
    if (z >= b) return 0.5 * w;
    const double u = z - a;
    return 0.5 * u - w / (4.0 * kPi) * std::sin(2.0 * kPi * u / w);
}

double Renormalizer::Sp(double z) const {
    if (z <= a || z >= b) return 0.0;
    const double s = std::sin(kPi * (z - a) / (b - a));
    return s * s;
}

double Renormalizer::Spp(double z) const {
    if (z <= a || z >= b) return 0.0;
    const double w = b - a;
    return kPi / w * std::sin(2.0 * kPi * (z - a) / w);
}

double ResidualSeries::max() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, r);
    return m;
}

ResidualSeries weak_residual(const SpdeEngine& e, const Trajectory& tr, const TestFunction& phi,
                             double boundary_window) {
    const GridSpec& g = e.grid();
    check_window(g, phi, boundary_window);
    check_trajectory(e, tr);
    const JetTable J = tabulate(g, phi);
    const auto& cfg = e.config();
    const auto& cov = e.covariance();
    const auto& fam = e.coefficients();
    const double dz = g.dz(), dt = tr.dt, half_e2 = 0.5 * cfg.eps * cfg.eps;
    const bool noisy = cfg.eps > 0.0 && !e.basis().modes.empty();
    const std::size_t N = g.size(), nv = g.velocity_size();

    auto pair = [&](const PhaseField& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += f.values[i] * J.phi[i];
        return s * dz;
    };
    ResidualSeries out;
    const double base = pair(tr.fields[0]);
    double accum = 0.0;
    out.t.push_back(0.0);
    out.residual.push_back(0.0);
    for (long long m = 0; m < tr.steps; ++m) {
        const PhaseField& f = tr.fields[static_cast<std::size_t>(m)];
        const VectorSpatialField b = e.drift_field(f);
        const VectorPhaseField gf = grad_v(f);
        NoiseSample ns;
        if (noisy) ns = e.noise(m);
        double W = 0.0, M = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double fi = f.values[i];
            double s = 0.0, sp = 0.0, spp = 0.0;
            if (half_e2 > 0.0 || noisy) fam.eval(std::max(fi, 0.0), s, sp, spp);
            double term = cfg.diffusion * fi * J.lap[i];
            for (int c = 0; c < g.d; ++c) {
                const double v = g.coordinate(i, g.d + c);
                if (cfg.transport) term += fi * v * J.gx[c][i];
                term += -cfg.friction * fi * v * J.gv[c][i] + fi * b[c].values[i / nv] * J.gv[c][i];
                if (half_e2 > 0.0)
                    term -= half_e2 * (cov.F1.values[i] * sp * sp * gf[c].values[i] + s * sp * cov.F2[c].values[i]) *
                            J.gv[c][i];
                if (noisy) M += cfg.eps * s * ns.dW[c].values[i] * J.gv[c][i];
            }
            W += term;
        }
        accum += dt * W * dz + M * dz;
        const double lhs = pair(tr.fields[static_cast<std::size_t>(m + 1)]) - base;
        out.t.push_back((m + 1) * dt);
        out.residual.push_back(std::abs(lhs - accum));
    }
    return out;
}

ResidualSeries kinetic_residual(const SpdeEngine& e, const Trajectory& tr, const TestFunction& phi,
                                const Renormalizer& S, double boundary_window) {
    const GridSpec& g = e.grid();
    check_window(g, phi, boundary_window);
    check_trajectory(e, tr);
    if (!(S.a > 0.0) || !(S.b > S.a)) throw std::invalid_argument("renormalizer support must lie in (0, inf)");
    const JetTable J = tabulate(g, phi);
    const auto& cfg = e.config();
    const auto& cov = e.covariance();
    const auto& fam = e.coefficients();
    const double dz = g.dz(), dt = tr.dt, eps2 = cfg.eps * cfg.eps, half_e2 = 0.5 * eps2;
    const bool noisy = cfg.eps > 0.0 && !e.basis().modes.empty();
    const std::size_t N = g.size(), nv = g.velocity_size();
    const int d = g.d;

    auto pair = [&](const PhaseField& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += S.S(f.values[i]) * J.phi[i];
        return s * dz;
    };
    ResidualSeries out;
    const double base = pair(tr.fields[0]);
    double accum = 0.0;
    out.t.push_back(0.0);
    out.residual.push_back(0.0);
    for (long long m = 0; m < tr.steps; ++m) {
        const PhaseField& f = tr.fields[static_cast<std::size_t>(m)];
        const VectorSpatialField b = e.drift_field(f);
        const VectorPhaseField gf = grad_v(f);
        PhaseField N_m;
        if (noisy) N_m = e.noise_term(f, e.noise(m));
        double transport = 0.0, damping = 0.0, kernel = 0.0, diffusion = 0.0, measure = 0.0;
        double cF1 = 0.0, cF2 = 0.0, cF3 = 0.0, mart = 0.0, qv = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double fi = f.values[i], Sf = S.S(fi), Sp = S.Sp(fi), Spp = S.Spp(fi), ph = J.phi[i];
            double s = 0.0, sp = 0.0, spp = 0.0;
            if (noisy || half_e2 > 0.0) fam.eval(std::max(fi, 0.0), s, sp, spp);
            double g2 = 0.0, gF2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double v = g.coordinate(i, d + c), gc = gf[c].values[i];
                g2 += gc * gc;
                gF2 += gc * cov.F2[c].values[i];
                if (cfg.transport) transport += Sf * v * J.gx[c][i];
                damping -= cfg.friction * Sf * v * J.gv[c][i];
                kernel += Sf * b[c].values[i / nv] * J.gv[c][i];
                if (half_e2 > 0.0) {
                    cF1 -= half_e2 * cov.F1.values[i] * sp * sp * Sp * gc * J.gv[c][i];
                    cF2 -= half_e2 * s * sp * Sp * cov.F2[c].values[i] * J.gv[c][i];
                }
            }
            damping += cfg.friction * d * ph * (fi * Sp - Sf);
            diffusion += cfg.diffusion * Sf * J.lap[i];
            measure -= cfg.diffusion * Spp * g2 * ph;
            if (half_e2 > 0.0) {
                cF2 += half_e2 * Spp * s * sp * gF2 * ph;
                cF3 += half_e2 * Spp * s * s * cov.F3.values[i] * ph;
            }
            if (noisy) {
                const double n = N_m.values[i];
                mart += Sp * ph * n;
                // Realized minus expected quadratic variation of the increment.
                const double expected = eps2 * dt * (sp * sp * g2 * cov.F1.values[i] + 2.0 * s * sp * gF2 +
                                                     s * s * cov.F3.values[i]);
                qv += 0.5 * Spp * ph * (n * n - expected);
            }
        }
        const double drift = transport + damping + kernel + diffusion + measure + cF1 + cF2 + cF3;
        accum += (dt * drift + mart + qv) * dz;
        const double lhs = pair(tr.fields[static_cast<std::size_t>(m + 1)]) - base;
        out.t.push_back((m + 1) * dt);
        out.residual.push_back(std::abs(lhs - accum));
    }
    return out;
}

StabilityReport l1_stability_test(const PhaseField& f0a, const PhaseField& f0b, const SchemeConfig& cfg,
                                  const NoiseBasis& basis, const DriftSpec& drift) {
    if (!(f0a.grid == f0b.grid)) throw std::invalid_argument("l1 stability: runs use different grids");
    StabilityReport rep;
    auto push = [&](double t, const PhaseField& a, const PhaseField& b) {
        rep.t.push_back(t);
        rep.distance.push_back(lp_distance(a, b, 1.0));
    };
    if (cfg.scheme == Scheme::linear_iteration) {
        RunOptions opt;
        opt.keep_every = 1;
        opt.record = false;
        const Trajectory a = run_nonlinear(f0a, cfg, basis, drift, opt);
        const Trajectory b = run_nonlinear(f0b, cfg, basis, drift, opt);
        if (a.steps != b.steps) throw std::invalid_argument("l1 stability: step counts differ");
        for (std::size_t n = 0; n < a.fields.size(); ++n) push(a.kept_steps[n] * a.dt, a.fields[n], b.fields[n]);
    } else {
        // One engine for both runs keeps dt and the noise path identical.
        const SpdeEngine e(f0a.grid, cfg, basis, drift, integrate(f0a));
        PhaseField a = f0a, b = f0b;
        push(0.0, a, b);
        for (long long n = 0; n < e.steps(); ++n) {
            a = e.step_ito(a, n);
            b = e.step_ito(b, n);
            push((n + 1) * e.dt(), a, b);
        }
    }
    for (double x : rep.distance) rep.sup_distance = std::max(rep.sup_distance, x);
    rep.growth_factor = rep.distance.front() > 0.0 ? rep.sup_distance / rep.distance.front() : 0.0;
    return rep;
}

std::string records_csv(const std::vector<DiagnosticsRecord>& recs) {
    std::string out = "t,mass,min,entropy,fisher,energy,grad_energy,clipped,boundary_fraction\n";
    char buf[512];
    for (const auto& r : recs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass, r.min,
                      r.entropy, r.fisher, r.energy, r.grad_energy, r.clipped, r.boundary_fraction);
        out += buf;
    }
    return out;
}

}  // namespace kfhd
