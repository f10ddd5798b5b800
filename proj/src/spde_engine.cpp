#include "kfhd/spde_engine.hpp"

#include "kfhd/kinetic_semigroup.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace kfhd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t next_on_axis(const GridSpec& g, std::size_t i, int axis) {
    const std::size_t s = g.axis_stride(axis);
    const int n = g.axis_size(axis);
    return g.coord(i, axis) == n - 1 ? i - static_cast<std::size_t>(n - 1) * s : i + s;
}

std::size_t prev_on_axis(const GridSpec& g, std::size_t i, int axis) {
    const std::size_t s = g.axis_stride(axis);
    const int n = g.axis_size(axis);
    return g.coord(i, axis) == 0 ? i + static_cast<std::size_t>(n - 1) * s : i - s;
}

double max_sigma_prime_sq(const CoefficientFamily& fam) {
    double m = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double z = fam.eps() * k / 400.0;
        m = std::max(m, fam.sigma_prime(z) * fam.sigma_prime(z));
    }
    m = std::max(m, fam.sigma_prime(fam.eps()) * fam.sigma_prime(fam.eps()));
    return m;
}

double sup_abs(const VectorSpatialField& b) {
    double m = 0.0;
    for (const auto& c : b)
        for (double x : c.values) m = std::max(m, std::abs(x));
    return m;
}

void axpy(PhaseField& y, double a, const PhaseField& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y.values[i] += a * x.values[i];
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::nonlinear_direct: return "nonlinear_direct";
        case Scheme::linear_iteration: return "linear_iteration";
        case Scheme::frozen_drift: return "frozen_drift";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "nonlinear_direct") return Scheme::nonlinear_direct;
    if (s == "linear_iteration") return Scheme::linear_iteration;
    if (s == "frozen_drift") return Scheme::frozen_drift;
    throw std::invalid_argument("unknown scheme '" + s + "'");
}

std::string to_string(TransportMode m) {
    return m == TransportMode::finite_volume ? "finite_volume" : "spectral_split";
}

TransportMode transport_from_string(const std::string& s) {
    if (s == "finite_volume") return TransportMode::finite_volume;
    if (s == "spectral_split") return TransportMode::spectral_split;
    throw std::invalid_argument("unknown transport mode '" + s + "'");
}

DriftSpec sinusoidal_kernel(const GridSpec& g, double amplitude, int k) {
    DriftSpec s;
    s.source = DriftSpec::Source::convolution;
    for (int c = 0; c < g.d; ++c)
        s.V.push_back(sample_spatial(g, [&](const double* x) { return amplitude * std::sin(kPi * k * x[c] / g.L_x); }));
    return s;
}

SpdeEngine::SpdeEngine(const GridSpec& g, const SchemeConfig& cfg, const NoiseBasis& basis, const DriftSpec& drift,
                       double mass_hint)
    : grid_(g), cfg_(cfg), fam_(cfg.n), basis_(basis), drift_(drift) {
    if (!(cfg.T >= 0.0)) throw std::invalid_argument("scheme: T must be >= 0");
    if (!(cfg.dt >= 0.0)) throw std::invalid_argument("scheme: dt must be >= 0");
    if (!(cfg.eps >= 0.0 && cfg.eps <= 1.0)) throw std::invalid_argument("scheme: eps must lie in [0, 1]");
    if (!(cfg.diffusion >= 0.0) || !(cfg.friction >= 0.0))
        throw std::invalid_argument("scheme: diffusion and friction must be >= 0");
    if (!(cfg.cfl > 0.0)) throw std::invalid_argument("scheme: cfl must be > 0");
    if (cfg.noise_stride < 1) throw std::invalid_argument("scheme: noise_stride must be >= 1");
    basis_.validate(g);
    eb_ = evaluate_basis(basis_, g);
    cov_ = covariance_fields(basis_, g);
    if (!basis_.modes.empty() && !check_compatibility(cov_).ok())
        throw std::invalid_argument("noise basis fails the compatibility conditions on this grid");

    if (drift_.source == DriftSpec::Source::convolution) {
        if (static_cast<int>(drift_.V.size()) != g.d) throw std::invalid_argument("drift kernel needs d components");
        for (const auto& c : drift_.V) require_same_grid(g, c.grid, "drift kernel");
    } else if (drift_.source == DriftSpec::Source::frozen) {
        if (static_cast<int>(drift_.b.size()) != g.d) throw std::invalid_argument("frozen drift needs d components");
        for (const auto& c : drift_.b) require_same_grid(g, c.grid, "frozen drift");
    }

    // Stability bound: diffusion, x transport and v advection, each summed over d axes.
    double b_sup = 0.0;
    if (drift_.source == DriftSpec::Source::convolution) b_sup = sup_abs(drift_.V) * std::abs(mass_hint);
    if (drift_.source == DriftSpec::Source::frozen) b_sup = sup_abs(drift_.b);
    double F1_sup = 0.0;
    for (double x : cov_.F1.values) F1_sup = std::max(F1_sup, x);
    const double D_eff = cfg.diffusion + 0.5 * cfg.eps * cfg.eps * F1_sup * max_sigma_prime_sq(fam_);
    const double hv = g.h_v(), hx = g.h_x();
    double bound = std::numeric_limits<double>::infinity();
    if (D_eff > 0.0) bound = std::min(bound, hv * hv / (g.d * D_eff));
    if (cfg.transport && cfg.transport_mode == TransportMode::finite_volume)
        bound = std::min(bound, hx / (g.d * g.L_v));
    const double adv = b_sup + cfg.friction * g.L_v;
    if (adv > 0.0) bound = std::min(bound, hv / (g.d * adv));
    cfl_bound_ = cfg.cfl * bound;

    if (cfg.T == 0.0) {
        dt_ = cfg.dt > 0.0 ? cfg.dt : (std::isfinite(cfl_bound_) ? cfl_bound_ : 0.0);
        steps_ = 0;
    } else {
        double target = cfg.dt;
        if (target == 0.0) {
            if (!std::isfinite(cfl_bound_)) throw std::invalid_argument("scheme: dt required when no CFL bound applies");
            target = cfl_bound_;
        } else if (target > cfl_bound_ * (1.0 + 1e-12)) {
            throw std::invalid_argument("CFL violation: dt = " + std::to_string(target) + " exceeds " +
                                        std::to_string(cfl_bound_));
        }
        steps_ = static_cast<long long>(std::ceil(cfg.T / target - 1e-9));
        steps_ = std::max<long long>(steps_, 1);
        dt_ = cfg.T / static_cast<double>(steps_);
    }
    path_ = NoisePath{cfg.seed, dt_, steps_, cfg.noise_stride, g.d};
}

VectorSpatialField SpdeEngine::drift_field(const PhaseField& f) const {
    switch (drift_.source) {
        case DriftSpec::Source::convolution: return convolve_x(drift_.V, marginal_density(f));
        case DriftSpec::Source::frozen: return drift_.b;
        case DriftSpec::Source::none: break;
    }
    return VectorSpatialField(grid_.d, SpatialField(grid_));
}

PhaseField SpdeEngine::flux_divergence(const PhaseField& f, const VectorSpatialField& b, const PhaseField* frozen,
                                       bool ito) const {
    const GridSpec& g = grid_;
    const std::size_t N = g.size(), nv = g.velocity_size();
    const PhaseField& coef = frozen ? *frozen : f;
    const double half_e2 = ito ? 0.5 * cfg_.eps * cfg_.eps : 0.0;
    const double D = cfg_.diffusion, gam = cfg_.friction, hv = g.h_v();

    // Node diffusivity and the correction flux per component.
    std::vector<double> Dn(N, D);
    VectorPhaseField corr;
    if (half_e2 > 0.0) {
        corr.assign(g.d, PhaseField(g));
        for (std::size_t i = 0; i < N; ++i) {
            double s, sp, spp;
            fam_.eval(std::max(coef.values[i], 0.0), s, sp, spp);
            Dn[i] += half_e2 * cov_.F1.values[i] * sp * sp;
            for (int c = 0; c < g.d; ++c) corr[c].values[i] = half_e2 * s * sp * cov_.F2[c].values[i];
        }
    }

    PhaseField out(g);
    std::vector<double> flux(N);
    for (int c = 0; c < g.d; ++c) {
        const int axis = g.d + c;
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t ip = next_on_axis(g, i, axis);
            const double bi = b[c].values[i / nv];
            const double ai = gam * g.coordinate(i, axis) - bi;
            const double ap = gam * g.coordinate(ip, axis) - bi;
            double J = 0.5 * (Dn[i] + Dn[ip]) * (f.values[ip] - f.values[i]) / hv;
            J += 0.5 * (ai * f.values[i] + ap * f.values[ip]);
            if (!corr.empty()) J += 0.5 * (corr[c].values[i] + corr[c].values[ip]);
            flux[i] = J;
        }
        for (std::size_t i = 0; i < N; ++i) out.values[i] += (flux[i] - flux[prev_on_axis(g, i, axis)]) / hv;
    }
    if (cfg_.transport && cfg_.transport_mode == TransportMode::finite_volume) add_transport(f, out);
    return out;
}

void SpdeEngine::add_transport(const PhaseField& f, PhaseField& out) const {
    const GridSpec& g = grid_;
    const double inv = 1.0 / (2.0 * g.h_x());
    for (int c = 0; c < g.d; ++c) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = g.coordinate(i, g.d + c);
            const double dfdx = (f.values[next_on_axis(g, i, c)] - f.values[prev_on_axis(g, i, c)]) * inv;
            out.values[i] -= v * dfdx;
        }
    }
}

PhaseField SpdeEngine::drift_term(const PhaseField& f, const VectorSpatialField& b) const {
    require_same_grid(grid_, f.grid, "drift_term");
    return flux_divergence(f, b, nullptr, true);
}

PhaseField SpdeEngine::stratonovich_drift(const PhaseField& f, const VectorSpatialField& b) const {
    require_same_grid(grid_, f.grid, "stratonovich_drift");
    return flux_divergence(f, b, nullptr, false);
}

NoiseSample SpdeEngine::noise(long long step) const {
    return assemble_noise(eb_, path_.increments(step, eb_.count()));
}

PhaseField SpdeEngine::noise_term(const PhaseField& f, const NoiseSample& s) const {
    VectorPhaseField G(grid_.d, PhaseField(grid_));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double sig = fam_.sigma(std::max(f.values[i], 0.0));
        for (int c = 0; c < grid_.d; ++c) G[c].values[i] = sig * s.dW[c].values[i];
    }
    PhaseField out = div_v(G);
    for (double& x : out.values) x *= -cfg_.eps;
    return out;
}

PhaseField SpdeEngine::rk3(const PhaseField& f, const VectorSpatialField* fixed_b, const PhaseField* frozen,
                           bool ito) const {
    const double dt = dt_;
    auto L = [&](const PhaseField& u) {
        const VectorSpatialField b = fixed_b ? *fixed_b : drift_field(u);
        return flux_divergence(u, b, frozen, ito);
    };
    PhaseField u1 = f;
    axpy(u1, dt, L(f));
    PhaseField t1 = u1;
    axpy(t1, dt, L(u1));
    PhaseField u2(grid_);
    for (std::size_t i = 0; i < f.size(); ++i) u2.values[i] = 0.75 * f.values[i] + 0.25 * t1.values[i];
    PhaseField t2 = u2;
    axpy(t2, dt, L(u2));
    PhaseField out(grid_);
    for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = f.values[i] / 3.0 + 2.0 * t2.values[i] / 3.0;
    return out;
}

PhaseField SpdeEngine::finish_step(PhaseField next, long long step, StepStats* stats) const {
    if (cfg_.transport && cfg_.transport_mode == TransportMode::spectral_split) next = gamma_transport(dt_, next);
    double total = 0.0, negative = 0.0, mn = std::numeric_limits<double>::infinity();
    for (double x : next.values) {
        if (!std::isfinite(x)) throw std::runtime_error("non-finite value at step " + std::to_string(step));
        total += x;
        mn = std::min(mn, x);
        if (x < 0.0) negative -= x;
    }
    if (negative > 0.0) {
        for (double& x : next.values) x = std::max(x, 0.0);
        const double after = total + negative;
        if (after > 0.0) {
            const double scale = total / after;
            for (double& x : next.values) x *= scale;
        }
    }
    if (stats) {
        stats->clipped = negative * grid_.dz();
        stats->min_before = mn;
    }
    return next;
}

PhaseField SpdeEngine::step_ito(const PhaseField& f, long long step, StepStats* stats) const {
    require_same_grid(grid_, f.grid, "step_ito");
    PhaseField next = rk3(f, nullptr, nullptr, true);
    if (cfg_.eps > 0.0 && eb_.count() > 0) axpy(next, 1.0, noise_term(f, noise(step)));
    return finish_step(std::move(next), step, stats);
}

PhaseField SpdeEngine::step_stratonovich(const PhaseField& f, long long step, StepStats* stats) const {
    require_same_grid(grid_, f.grid, "step_stratonovich");
    const bool noisy = cfg_.eps > 0.0 && eb_.count() > 0;
    NoiseSample s;
    if (noisy) s = noise(step);
    const PhaseField a0 = stratonovich_drift(f, drift_field(f));
    PhaseField n0(grid_);
    if (noisy) n0 = noise_term(f, s);
    PhaseField pred = f;
    axpy(pred, dt_, a0);
    axpy(pred, 1.0, n0);
    const PhaseField a1 = stratonovich_drift(pred, drift_field(pred));
    PhaseField next = f;
    axpy(next, 0.5 * dt_, a0);
    axpy(next, 0.5 * dt_, a1);
    if (noisy) {
        axpy(next, 0.5, n0);
        axpy(next, 0.5, noise_term(pred, s));
    }
    return finish_step(std::move(next), step, stats);
}

namespace {

template <class Step>
Trajectory drive(const SpdeEngine& e, const PhaseField& f0, const RunOptions& opt, Step&& step) {
    require_same_grid(e.grid(), f0.grid, "run");
    require_finite(f0, "initial datum");
    Trajectory tr;
    tr.dt = e.dt();
    tr.steps = e.steps();
    PhaseField f = f0;
    const double mass0 = std::abs(integrate(f0));
    tr.kept_steps.push_back(0);
    tr.fields.push_back(f);
    if (opt.record) tr.records.push_back(record(f, 0.0));
    for (long long n = 0; n < e.steps(); ++n) {
        StepStats st;
        f = step(f, n, &st);
        if (mass0 > 0.0) tr.max_clipped_fraction = std::max(tr.max_clipped_fraction, st.clipped / mass0);
        const bool last = n + 1 == e.steps();
        if (last || (opt.keep_every > 0 && (n + 1) % opt.keep_every == 0)) {
            tr.kept_steps.push_back(n + 1);
            tr.fields.push_back(f);
        }
        if (opt.record) tr.records.push_back(record(f, (n + 1) * e.dt(), st.clipped));
    }
    return tr;
}

}  // namespace

Trajectory SpdeEngine::run(const PhaseField& f0, const RunOptions& opt) const {
    return drive(*this, f0, opt, [&](const PhaseField& f, long long n, StepStats* st) { return step_ito(f, n, st); });
}

Trajectory SpdeEngine::run_stratonovich(const PhaseField& f0, const RunOptions& opt) const {
    return drive(*this, f0, opt,
                 [&](const PhaseField& f, long long n, StepStats* st) { return step_stratonovich(f, n, st); });
}

Trajectory SpdeEngine::linear_solve(const PhaseField& f0, const std::vector<PhaseField>& frozen,
                                    const RunOptions& opt) const {
    if (static_cast<long long>(frozen.size()) < steps_)
        throw std::invalid_argument("linear_solve: frozen trajectory shorter than the step count");
    const bool noisy = cfg_.eps > 0.0 && eb_.count() > 0;
    return drive(*this, f0, opt, [&](const PhaseField& u, long long n, StepStats* st) {
        const PhaseField& p = frozen[static_cast<std::size_t>(n)];
        const VectorSpatialField b = drift_field(p);
        PhaseField next = rk3(u, &b, &p, true);
        if (noisy) {
            // Noise linearized about the frozen state: sigma(p) + sigma'(p)(u - p).
            const NoiseSample s = noise(n);
            VectorPhaseField G(grid_.d, PhaseField(grid_));
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double pi = std::max(p.values[i], 0.0);
                const double amp = fam_.sigma(pi) + fam_.sigma_prime(pi) * (u.values[i] - pi);
                for (int c = 0; c < grid_.d; ++c) G[c].values[i] = amp * s.dW[c].values[i];
            }
            axpy(next, -cfg_.eps, div_v(G));
        }
        return finish_step(std::move(next), n, st);
    });
}

LinearIterationResult SpdeEngine::run_linear_iteration(const PhaseField& f0, int iterations,
                                                       double divergence_ratio) const {
    if (iterations < 1) throw std::invalid_argument("linear iteration: iterations must be >= 1");
    LinearIterationResult res;
    std::vector<PhaseField> prev(static_cast<std::size_t>(steps_) + 1, f0);
    RunOptions opt;
    opt.keep_every = 1;
    for (int k = 0; k < iterations; ++k) {
        Trajectory tr = linear_solve(f0, prev, opt);
        double acc = 0.0;
        for (std::size_t n = 0; n < tr.fields.size(); ++n) {
            const double d = lp_distance(tr.fields[n], prev[n], 2.0);
            acc += tr.dt * d * d;
        }
        const double dist = std::sqrt(acc);
        res.distances.push_back(dist);
        const bool blown = !std::isfinite(dist) ||
                           (k >= 2 && res.distances[k - 1] > 0.0 && dist > divergence_ratio * res.distances[k - 1]);
        if (blown)
            throw IterationDivergence("linear iteration diverged at iterate " + std::to_string(k + 1), res.distances);
        prev = tr.fields;
        res.iterates.push_back(std::move(tr));
    }
    return res;
}

Trajectory run_nonlinear(const PhaseField& f0, const SchemeConfig& cfg, const NoiseBasis& basis, const DriftSpec& drift,
                         const RunOptions& opt) {
    const SpdeEngine e(f0.grid, cfg, basis, drift, integrate(f0));
    switch (cfg.scheme) {
        case Scheme::linear_iteration: {
            auto res = e.run_linear_iteration(f0, cfg.iterations);
            Trajectory tr = std::move(res.iterates.back());
            if (opt.keep_every != 1) {
                std::vector<long long> ks;
                std::vector<PhaseField> fs;
                for (std::size_t i = 0; i < tr.fields.size(); ++i) {
                    const long long s = tr.kept_steps[i];
                    if (s == 0 || s == tr.steps || (opt.keep_every > 0 && s % opt.keep_every == 0)) {
                        ks.push_back(s);
                        fs.push_back(std::move(tr.fields[i]));
                    }
                }
                tr.kept_steps = std::move(ks);
                tr.fields = std::move(fs);
            }
            return tr;
        }
        case Scheme::frozen_drift:
            if (drift.source != DriftSpec::Source::frozen)
                throw std::invalid_argument("frozen_drift scheme needs a frozen drift field");
            return e.run(f0, opt);
        case Scheme::nonlinear_direct: break;
    }
    return e.run(f0, opt);
}

Trajectory deterministic_vfp(const PhaseField& f0, const SchemeConfig& cfg, const DriftSpec& drift,
                             const RunOptions& opt) {
    if (cfg.eps != 0.0) throw std::invalid_argument("deterministic_vfp: eps must be 0");
    SchemeConfig c = cfg;
    c.scheme = drift.source == DriftSpec::Source::frozen ? Scheme::frozen_drift : Scheme::nonlinear_direct;
    const SpdeEngine e(f0.grid, c, NoiseBasis{}, drift, integrate(f0));
    return e.run(f0, opt);
}

TruncatedFields truncated_fields(const PhaseField& f, const TruncationKit& kit, const CoefficientFamily& fam,
                                 const CovarianceFields& cov) {
    const GridSpec& g = f.grid;
    require_same_grid(g, cov.F1.grid, "truncated_fields");
    kit.validate();
    const std::size_t N = g.size();
    const int d = g.d;
    const double hv = g.h_v();
    std::vector<double> fc(N), h(N), hp(N), hpp(N), s(N), sp(N), spp(N);
    for (std::size_t i = 0; i < N; ++i) {
        fc[i] = std::max(f.values[i], 0.0);
        h[i] = kit.h_delta(fc[i]);
        hp[i] = kit.h_delta_prime(fc[i]);
        hpp[i] = kit.h_delta_second(fc[i]);
        fam.eval(fc[i], s[i], sp[i], spp[i]);
    }
    PhaseField clipped(g);
    clipped.values = fc;
    const VectorPhaseField grad = grad_v(clipped);
    PhaseField sig(g);
    sig.values = s;
    const VectorPhaseField grad_sig = grad_v(sig);

    TruncatedFields out{PhaseField(g), PhaseField(g), VectorPhaseField(d, PhaseField(g)), PhaseField(g)};
    // First term of g1 in face form: (1/2) div_v(h' sigma'^2 F1 grad_v f).
    for (int c = 0; c < d; ++c) {
        const int axis = d + c;
        std::vector<double> flux(N);
        for (std::size_t i = 0; i < N; ++i) {
            const std::size_t ip = next_on_axis(g, i, axis);
            const double ci = hp[i] * sp[i] * sp[i] * cov.F1.values[i];
            const double cp = hp[ip] * sp[ip] * sp[ip] * cov.F1.values[ip];
            flux[i] = 0.25 * (ci + cp) * (fc[ip] - fc[i]) / hv;
        }
        for (std::size_t i = 0; i < N; ++i) out.g1.values[i] += (flux[i] - flux[prev_on_axis(g, i, axis)]) / hv;
    }
    for (std::size_t i = 0; i < N; ++i) {
        double gF2 = 0.0, g2sq = 0.0;
        for (int c = 0; c < d; ++c) {
            gF2 += grad[c].values[i] * cov.F2[c].values[i];
            g2sq += grad[c].values[i] * grad[c].values[i];
        }
        const double sspd = sp[i] * sp[i] + s[i] * spp[i];
        out.g1.values[i] += 0.5 * hp[i] * sspd * gF2 + 0.5 * hpp[i] * s[i] * sp[i] * gF2;
        out.g2.values[i] = -hpp[i] * g2sq + d * hp[i] * fc[i] - d * h[i] + 0.5 * hpp[i] * s[i] * s[i] * cov.F3.values[i];
        for (int c = 0; c < d; ++c) out.h1[c].values[i] = hp[i] * grad_sig[c].values[i];
        out.h2.values[i] = hp[i] * s[i];
    }
    return out;
}

std::uint64_t member_seed(std::uint64_t seed, int member) {
    // splitmix64 finalizer on (seed, member).
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(member) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

int worker_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* s = std::getenv("KFHD_THREADS")) {
        const int req = std::atoi(s);
        if (req >= 1) return std::min(req, hw);
    }
    return hw;
}

std::vector<Trajectory> run_ensemble(const PhaseField& f0, const GridSpec& g, const SchemeConfig& cfg,
                                     const NoiseBasis& basis, const DriftSpec& drift, int members,
                                     const RunOptions& opt, int threads) {
    if (members < 1) throw std::invalid_argument("ensemble: members must be >= 1");
    require_same_grid(g, f0.grid, "run_ensemble");
    if (threads <= 0) threads = worker_threads();
    threads = std::min(threads, members);
    std::vector<Trajectory> out(static_cast<std::size_t>(members));
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (int m; (m = next.fetch_add(1)) < members;) {
            if (failed) return;
            try {
                SchemeConfig c = cfg;
                c.seed = member_seed(cfg.seed, m);
                out[static_cast<std::size_t>(m)] = run_nonlinear(f0, c, basis, drift, opt);
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace kfhd
