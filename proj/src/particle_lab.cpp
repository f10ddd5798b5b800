#include "kfhd/particle_lab.hpp"

#include "kfhd/noise_model.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace kfhd {

namespace {

constexpr double kKernelReach = 6.0;  // Gaussian bumps are cut at this many bandwidths

// Philox stream tags so sampling and dynamics never share counters.
constexpr std::uint32_t kTagSample = 1;
constexpr std::uint32_t kTagDynamics = 2;

void put_le(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_le(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!is) throw std::runtime_error("particles: truncated payload");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
}

// Two uniforms in [0, 1) from one Philox block.
std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b, std::uint32_t c) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto w = Philox4x32::apply({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, c}, key);
    const std::uint64_t x = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t y = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    return {static_cast<double>(x >> 11) * 0x1.0p-53, static_cast<double>(y >> 11) * 0x1.0p-53};
}

// Cloud-in-cell stencil of point x along one periodic axis with n nodes at -L + k h.
struct Stencil {
    int lo;
    double w_lo;
};

Stencil cic(double x, double L, int n) {
    const double h = 2.0 * L / n;
    const double s = (wrap_periodic(x, L) + L) / h;
    int lo = static_cast<int>(std::floor(s));
    double frac = s - lo;
    if (lo >= n) lo -= n;  // wrap_periodic can round up to exactly L
    if (lo < 0) lo += n;
    frac = std::clamp(frac, 0.0, 1.0);
    return {lo, 1.0 - frac};
}

std::size_t spatial_flat(const int* idx, int d, int n) {
    std::size_t s = 0;
    for (int c = 0; c < d; ++c) s = s * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[c]);
    return s;
}

// Visits the 2^d cloud-in-cell corners of x with their weights.
template <class Fn>
void for_each_corner(const double* x, double L, int n, int d, Fn&& fn) {
    Stencil st[2];
    for (int c = 0; c < d; ++c) st[c] = cic(x[c], L, n);
    for (int mask = 0; mask < (1 << d); ++mask) {
        int idx[2];
        double w = 1.0;
        for (int c = 0; c < d; ++c) {
            const bool up = (mask >> c) & 1;
            idx[c] = up ? (st[c].lo + 1) % n : st[c].lo;
            w *= up ? 1.0 - st[c].w_lo : st[c].w_lo;
        }
        fn(spatial_flat(idx, d, n), w);
    }
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 0) threads = worker_threads();
    threads = std::max(1, std::min(threads, count / 64 + 1));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            try {
                for (int i; (i = next.fetch_add(1)) < count;) fn(i);
            } catch (...) {
                err = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// Normalized node weights of a Gaussian of width b centred at x on a periodic axis, divided by h.
void axis_weights(double x, double origin, double h, int n, double b, std::vector<int>& idx, std::vector<double>& w) {
    idx.clear();
    w.clear();
    const double L = -origin;
    const double xc = wrap_periodic(x, L);
    const int reach = std::min(static_cast<int>(std::ceil(kKernelReach * b / h)), n / 2 - 1);
    const int centre = static_cast<int>(std::lround((xc - origin) / h));
    double total = 0.0;
    for (int k = centre - reach; k <= centre + reach; ++k) {
        const double r = (origin + k * h - xc) / b;
        const double val = std::exp(-0.5 * r * r);
        idx.push_back(((k % n) + n) % n);
        w.push_back(val);
        total += val;
    }
    for (double& v : w) v /= total * h;
}

}  // namespace

double wrap_periodic(double x, double L) {
    const double p = 2.0 * L;
    double y = x - p * std::floor((x + L) / p);
    if (y >= L) y -= p;
    if (y < -L) y = -L;
    return y;
}

double ParticleEnsemble::momentum(int c) const {
    double s = 0.0;
    for (int i = 0; i < N(); ++i) s += V[static_cast<std::size_t>(i) * d + c];
    return s;
}

void ParticleEnsemble::validate() const {
    if (d != 1 && d != 2) throw std::invalid_argument("particles: d must be 1 or 2");
    if (!(L_x > 0.0)) throw std::invalid_argument("particles: box half-width must be positive");
    if (!(kappa >= 0.0)) throw std::invalid_argument("particles: kappa must be >= 0");
    if (X.size() != V.size() || X.empty() || X.size() % static_cast<std::size_t>(d) != 0)
        throw std::invalid_argument("particles: need N >= 1 with matching position and velocity arrays");
    for (std::size_t k = 0; k < X.size(); ++k)
        if (!std::isfinite(X[k]) || !std::isfinite(V[k])) throw std::runtime_error("particles: non-finite state");
}

ParticleEnsemble sample_particles(const PhaseField& f, int N, std::uint64_t seed, double kappa) {
    if (N < 1) throw std::invalid_argument("sample_particles: N must be >= 1");
    const GridSpec& g = f.grid;
    std::vector<double> cdf(f.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f.values[i] >= 0.0)) throw std::invalid_argument("sample_particles: density must be nonnegative");
        acc += f.values[i];
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("sample_particles: density has no mass");
    ParticleEnsemble e;
    e.d = g.d;
    e.L_x = g.L_x;
    e.kappa = kappa;
    e.seed = seed;
    e.X.resize(static_cast<std::size_t>(N) * g.d);
    e.V.resize(e.X.size());
    for (int p = 0; p < N; ++p) {
        const auto u = uniform_pair(seed, static_cast<std::uint64_t>(p), 0u, kTagSample);
        const auto pick = std::upper_bound(cdf.begin(), cdf.end(), u[0] * acc);
        const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(pick - cdf.begin()), f.size() - 1);
        // Jitter uniformly over the cell centred on the node.
        for (int c = 0; c < g.d; ++c) {
            const auto j = uniform_pair(seed, static_cast<std::uint64_t>(p), 1u + static_cast<std::uint32_t>(c), kTagSample);
            const std::size_t k = static_cast<std::size_t>(p) * g.d + c;
            e.X[k] = wrap_periodic(g.coordinate(cell, c) + (j[0] - 0.5) * g.h_x(), g.L_x);
            e.V[k] = g.coordinate(cell, g.d + c) + (j[1] - 0.5) * g.h_v();
        }
    }
    return e;
}

std::string to_string(ForceMethod m) { return m == ForceMethod::direct ? "direct" : "binned"; }

ForceMethod force_from_string(const std::string& s) {
    if (s == "direct") return ForceMethod::direct;
    if (s == "binned") return ForceMethod::binned;
    throw std::invalid_argument("unknown force method '" + s + "' (expected direct or binned)");
}

double interpolate_spatial(const SpatialField& s, const double* x) {
    const GridSpec& g = s.grid;
    double out = 0.0;
    for_each_corner(x, g.L_x, g.n_x, g.d, [&](std::size_t k, double w) { out += w * s.values[k]; });
    return out;
}

std::vector<double> interaction_force(const ParticleEnsemble& e, const VectorSpatialField& V, ForceMethod method,
                                      int threads) {
    const int N = e.N();
    const int d = e.d;
    std::vector<double> F(static_cast<std::size_t>(N) * d, 0.0);
    if (V.empty()) return F;
    if (static_cast<int>(V.size()) != d) throw std::invalid_argument("interaction_force: kernel needs d components");
    const GridSpec& g = V[0].grid;
    if (g.d != d || g.L_x != e.L_x) throw std::invalid_argument("interaction_force: kernel grid does not match the box");
    const double invN = 1.0 / N;

    if (method == ForceMethod::direct) {
        parallel_for(N, threads, [&](int i) {
            double acc[2] = {0.0, 0.0};
            double sep[2];
            for (int j = 0; j < N; ++j) {
                for (int c = 0; c < d; ++c)
                    sep[c] = e.X[static_cast<std::size_t>(i) * d + c] - e.X[static_cast<std::size_t>(j) * d + c];
                for (int c = 0; c < d; ++c) acc[c] += interpolate_spatial(V[c], sep);
            }
            for (int c = 0; c < d; ++c) F[static_cast<std::size_t>(i) * d + c] = acc[c] * invN;
        });
        return F;
    }

    SpatialField rho(g);
    const double inv_cell = invN / g.dx();
    for (int i = 0; i < N; ++i)
        for_each_corner(&e.X[static_cast<std::size_t>(i) * d], g.L_x, g.n_x, d,
                        [&](std::size_t k, double w) { rho.values[k] += w * inv_cell; });
    const VectorSpatialField b = convolve_x(V, rho);
    parallel_for(N, threads, [&](int i) {
        for (int c = 0; c < d; ++c)
            F[static_cast<std::size_t>(i) * d + c] = interpolate_spatial(b[c], &e.X[static_cast<std::size_t>(i) * d]);
    });
    return F;
}

ParticleTrajectory simulate_particles(const ParticleEnsemble& init, const VectorSpatialField& V,
                                      const ParticleConfig& cfg) {
    init.validate();
    if (!(cfg.T >= 0.0)) throw std::invalid_argument("particles: T must be >= 0");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("particles: dt must be > 0");
    if (!(cfg.dt * init.kappa < 1.0)) throw std::invalid_argument("particles: dt * kappa must be < 1");
    if (cfg.keep_every < 0) throw std::invalid_argument("particles: keep_every must be >= 0");

    ParticleTrajectory tr;
    tr.steps = static_cast<long long>(std::ceil(cfg.T / cfg.dt - 1e-9));
    tr.dt = tr.steps > 0 ? cfg.T / tr.steps : cfg.dt;
    const double dt = tr.dt;
    const double noise = std::sqrt(init.kappa * dt);
    const int N = init.N();
    const int d = init.d;
    const std::size_t M = init.X.size();

    ParticleEnsemble cur = init;
    tr.snapshots.push_back(cur);
    tr.momentum.push_back(cur.momentum());
    for (long long s = 0; s < tr.steps; ++s) {
        const std::vector<double> F = interaction_force(cur, V, cfg.force, cfg.threads);
        for (std::size_t k = 0; k < M; ++k) cur.X[k] = wrap_periodic(cur.X[k] + dt * cur.V[k], cur.L_x);
        for (int p = 0; p < N; ++p) {
            std::array<double, 2> xi{0.0, 0.0};
            if (noise > 0.0) xi = gaussian_pair(init.seed, static_cast<std::uint64_t>(s), static_cast<std::uint32_t>(p), kTagDynamics);
            for (int c = 0; c < d; ++c) {
                const std::size_t k = static_cast<std::size_t>(p) * d + c;
                cur.V[k] += dt * (F[k] - init.kappa * cur.V[k]) + noise * xi[c];
            }
        }
        cur.t = (s + 1) * dt;
        for (std::size_t k = 0; k < M; ++k)
            if (!std::isfinite(cur.V[k]) || !std::isfinite(cur.X[k]))
                throw std::runtime_error("particles: non-finite state at step " + std::to_string(s + 1));
        tr.momentum.push_back(cur.momentum());
        const bool last = s + 1 == tr.steps;
        if (last || (cfg.keep_every > 0 && (s + 1) % cfg.keep_every == 0)) tr.snapshots.push_back(cur);
    }
    return tr;
}

Bandwidth standard_bandwidth(const GridSpec& g) { return {std::max(0.2, g.h_x()), std::max(0.2, g.h_v())}; }

PhaseField empirical_density(const ParticleEnsemble& e, const GridSpec& g, Bandwidth bw, double mass) {
    e.validate();
    if (g.d != e.d || g.L_x != e.L_x) throw std::invalid_argument("empirical_density: grid does not match the box");
    if (!(bw.x >= g.h_x() * (1 - 1e-12)) || !(bw.v >= g.h_v() * (1 - 1e-12)))
        throw std::invalid_argument("empirical_density: bandwidth must be at least the grid spacing");
    const int N = e.N();
    const int d = e.d;
    // Canonical order: lexicographic in (X, V), so any relabelling accumulates identically.
    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](int p, int k) { return k < d ? e.X[static_cast<std::size_t>(p) * d + k] : e.V[static_cast<std::size_t>(p) * d + k - d]; };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int k = 0; k < 2 * d; ++k)
            if (key(a, k) != key(b, k)) return key(a, k) < key(b, k);
        return false;
    });

    PhaseField out(g);
    const int axes = g.axis_count();
    std::vector<std::vector<int>> idx(axes);
    std::vector<std::vector<double>> w(axes);
    std::vector<std::size_t> stride(axes);
    for (int a = 0; a < axes; ++a) stride[a] = g.axis_stride(a);
    const double scale = mass / N;
    for (int p : order) {
        for (int a = 0; a < axes; ++a) {
            const bool xa = a < d;
            axis_weights(key(p, a), g.axis_origin(a), g.axis_spacing(a), g.axis_size(a), xa ? bw.x : bw.v, idx[a], w[a]);
        }
        if (axes == 2) {
            for (std::size_t i = 0; i < idx[0].size(); ++i) {
                const double wi = scale * w[0][i];
                double* row = &out.values[idx[0][i] * stride[0]];
                for (std::size_t j = 0; j < idx[1].size(); ++j) row[idx[1][j]] += wi * w[1][j];
            }
        } else {
            std::vector<std::size_t> pos(axes, 0);
            while (true) {
                double wt = scale;
                std::size_t flat = 0;
                for (int a = 0; a < axes; ++a) {
                    wt *= w[a][pos[a]];
                    flat += static_cast<std::size_t>(idx[a][pos[a]]) * stride[a];
                }
                out.values[flat] += wt;
                int a = axes - 1;
                while (a >= 0 && ++pos[a] == idx[a].size()) pos[a--] = 0;
                if (a < 0) break;
            }
        }
    }
    return out;
}

PhaseField smooth_field(const PhaseField& f, Bandwidth bw) {
    const GridSpec& g = f.grid;
    PhaseField cur = f;
    std::vector<int> idx;
    std::vector<double> w;
    for (int a = 0; a < g.axis_count(); ++a) {
        const int n = g.axis_size(a);
        const double h = g.axis_spacing(a);
        // Node-centred weights, shared by every node on this axis.
        axis_weights(g.axis_origin(a) + (n / 2) * h, g.axis_origin(a), h, n, a < g.d ? bw.x : bw.v, idx, w);
        const std::size_t stride = g.axis_stride(a);
        const std::size_t block = stride * static_cast<std::size_t>(n);
        PhaseField next(g);
        for (std::size_t base = 0; base < g.size(); base += block)
            for (std::size_t r = 0; r < stride; ++r)
                for (int m = 0; m < n; ++m) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < idx.size(); ++k) {
                        const int src = ((m + idx[k] - n / 2) % n + n) % n;
                        acc += w[k] * h * cur.values[base + r + static_cast<std::size_t>(src) * stride];
                    }
                    next.values[base + r + static_cast<std::size_t>(m) * stride] = acc;
                }
        cur = std::move(next);
    }
    return cur;
}

MeanFieldSeries compare_meanfield(const ParticleTrajectory& particles, const Trajectory& pde, Bandwidth bw) {
    if (pde.fields.empty() || particles.snapshots.empty() || pde.kept_steps.size() != pde.fields.size())
        throw std::invalid_argument("compare_meanfield: empty trajectory");
    const GridSpec& g = pde.fields.front().grid;
    const double pde_T = pde.steps * pde.dt;
    const double part_T = particles.steps * particles.dt;
    if (std::abs(pde_T - part_T) > 1e-9 * std::max(1.0, pde_T))
        throw std::invalid_argument("compare_meanfield: horizons differ");
    if (g.L_x != particles.snapshots.front().L_x || g.d != particles.snapshots.front().d)
        throw std::invalid_argument("compare_meanfield: particle box does not match the grid");
    MeanFieldSeries out;
    const double mass = integrate(pde.fields.front());
    for (const auto& snap : particles.snapshots) {
        // Match the PDE field stored at the same time.
        std::size_t best = pde.fields.size();
        for (std::size_t k = 0; k < pde.fields.size(); ++k) {
            const double tk = pde.kept_steps[k] * pde.dt;
            if (std::abs(tk - snap.t) <= 1e-9 * std::max(1.0, pde_T)) best = k;
        }
        if (best == pde.fields.size()) continue;
        const PhaseField emp = empirical_density(snap, g, bw, mass);
        const PhaseField& ref = pde.fields[best];
        out.t.push_back(snap.t);
        out.distance.push_back(lp_distance(emp, ref, 1.0));
        out.mc_distance.push_back(lp_distance(emp, smooth_field(ref, bw), 1.0));
    }
    if (out.t.empty()) throw std::invalid_argument("compare_meanfield: no snapshot times in common");
    return out;
}

SchemeConfig meanfield_scheme(double kappa, double T) {
    SchemeConfig c;
    c.T = T;
    c.eps = 0.0;
    c.diffusion = 0.5 * kappa;
    c.friction = kappa;
    return c;
}

void write_particles(const std::string& path, const ParticleEnsemble& e) {
    e.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("particles: cannot open " + path);
    char header[256];
    std::snprintf(header, sizeof header, "KFHDP1 %d %d %.17g\n", e.d, e.N(), e.t);
    os << header;
    for (int p = 0; p < e.N(); ++p) {
        for (int c = 0; c < e.d; ++c) put_le(os, e.X[static_cast<std::size_t>(p) * e.d + c]);
        for (int c = 0; c < e.d; ++c) put_le(os, e.V[static_cast<std::size_t>(p) * e.d + c]);
    }
    if (!os) throw std::runtime_error("particles: write failed for " + path);
}

ParticleEnsemble read_particles(const std::string& path, double L_x, double kappa) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("particles: cannot open " + path);
    std::string line;
    std::getline(is, line);
    std::istringstream hs(line);
    std::string magic;
    ParticleEnsemble e;
    int N = 0;
    e.L_x = L_x;
    e.kappa = kappa;
    hs >> magic >> e.d >> N >> e.t;
    if (magic != "KFHDP1" || !hs || N < 1 || (e.d != 1 && e.d != 2))
        throw std::runtime_error("particles: bad header in " + path);
    e.X.resize(static_cast<std::size_t>(N) * e.d);
    e.V.resize(e.X.size());
    for (int p = 0; p < N; ++p) {
        for (int c = 0; c < e.d; ++c) e.X[static_cast<std::size_t>(p) * e.d + c] = get_le(is);
        for (int c = 0; c < e.d; ++c) e.V[static_cast<std::size_t>(p) * e.d + c] = get_le(is);
    }
    e.validate();
    return e;
}

}  // namespace kfhd
