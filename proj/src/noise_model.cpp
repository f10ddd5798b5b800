#include "kfhd/noise_model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace kfhd {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr double kPi = 3.14159265358979323846;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b, std::uint32_t c) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, c};
    const auto w = Philox4x32::apply(ctr, key);
    const std::uint64_t x = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t y = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    const double u1 = static_cast<double>((x >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(y >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
}

int NoiseBasis::function_count() const {
    int n = 0;
    for (const auto& m : modes) n += (m.kind == ModeKind::pair) ? 2 : 1;
    return n;
}

void NoiseBasis::validate(const GridSpec& g) const {
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto& m = modes[i];
        if (!(m.a > 0.0) || !std::isfinite(m.a))
            throw std::invalid_argument("noise mode " + std::to_string(i) + ": amplitude must be finite and positive");
        for (int c = 0; c < g.d; ++c) {
            if (std::abs(m.kx[c]) >= g.n_x / 2 || std::abs(m.kv[c]) >= g.n_v / 2)
                throw std::invalid_argument("noise mode " + std::to_string(i) + ": wavevector aliases on the grid");
        }
        for (int c = g.d; c < 2; ++c) {
            if (m.kx[c] != 0 || m.kv[c] != 0)
                throw std::invalid_argument("noise mode " + std::to_string(i) + ": wavevector has more components than d");
        }
    }
}

std::string NoiseBasis::digest() const {
    std::ostringstream os;
    for (const auto& m : modes) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s:%.17g:%d,%d:%d,%d;",
                      m.kind == ModeKind::pair ? "pair" : (m.kind == ModeKind::sin_only ? "sin" : "cos"), m.a, m.kx[0],
                      m.kx[1], m.kv[0], m.kv[1]);
        os << buf;
    }
    // FNV-1a over the canonical listing.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : os.str()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

namespace {

struct ModeGeometry {
    double kx[2];
    double kv[2];
    double kv2;
};

ModeGeometry geometry(const NoiseMode& m, const GridSpec& g) {
    ModeGeometry geo{};
    for (int c = 0; c < g.d; ++c) {
        geo.kx[c] = kPi * m.kx[c] / g.L_x;
        geo.kv[c] = kPi * m.kv[c] / g.L_v;
        geo.kv2 += geo.kv[c] * geo.kv[c];
    }
    return geo;
}

double phase_at(const ModeGeometry& geo, const GridSpec& g, std::size_t i) {
    double ph = 0.0;
    for (int c = 0; c < g.d; ++c) ph += geo.kx[c] * g.coordinate(i, c) + geo.kv[c] * g.coordinate(i, g.d + c);
    return ph;
}

}  // namespace

CovarianceFields covariance_fields(const NoiseBasis& basis, const GridSpec& g) {
    basis.validate(g);
    CovarianceFields cov{PhaseField(g), VectorPhaseField(g.d, PhaseField(g)), PhaseField(g), PhaseField(g)};
    for (const auto& m : basis.modes) {
        const ModeGeometry geo = geometry(m, g);
        const double a2 = m.a * m.a;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double ph = phase_at(geo, g, i);
            const double s = std::sin(ph), c = std::cos(ph);
            // Per-function terms; sin partner first, cos partner second.
            const double grad_sq_sin = a2 * geo.kv2 * (c * c);
            const double grad_sq_cos = a2 * geo.kv2 * (s * s);
            switch (m.kind) {
                case ModeKind::pair: {
                    cov.F1.values[i] += a2 * (s * s) + a2 * (c * c);
                    for (int k = 0; k < g.d; ++k) {
                        const double t = a2 * geo.kv[k] * (s * c);
                        cov.F2[k].values[i] += t + (-t);
                    }
                    cov.F3.values[i] += grad_sq_sin + grad_sq_cos;
                    cov.F4.values[i] += (-grad_sq_cos) + (-grad_sq_sin);
                    break;
                }
                case ModeKind::sin_only:
                    cov.F1.values[i] += a2 * (s * s);
                    for (int k = 0; k < g.d; ++k) cov.F2[k].values[i] += a2 * geo.kv[k] * (s * c);
                    cov.F3.values[i] += grad_sq_sin;
                    cov.F4.values[i] += -grad_sq_cos;
                    break;
                case ModeKind::cos_only:
                    cov.F1.values[i] += a2 * (c * c);
                    for (int k = 0; k < g.d; ++k) cov.F2[k].values[i] += -(a2 * geo.kv[k] * (s * c));
                    cov.F3.values[i] += grad_sq_cos;
                    cov.F4.values[i] += -grad_sq_sin;
                    break;
            }
        }
    }
    return cov;
}

bool CompatibilityReport::ok(double rel_tol) const {
    const double scale = rel_tol * F3_sup;
    return max_div_F2 <= scale && max_F3_plus_F4 <= scale;
}

CompatibilityReport check_compatibility(const CovarianceFields& cov) {
    CompatibilityReport r;
    const PhaseField div = div_v(cov.F2);
    r.max_div_F2 = lp_norm(div, INFINITY);
    for (std::size_t i = 0; i < cov.F3.size(); ++i) {
        r.max_F3_plus_F4 = std::max(r.max_F3_plus_F4, std::abs(cov.F3.values[i] + cov.F4.values[i]));
        r.F3_sup = std::max(r.F3_sup, std::abs(cov.F3.values[i]));
    }
    return r;
}

EvaluatedBasis evaluate_basis(const NoiseBasis& basis, const GridSpec& g) {
    basis.validate(g);
    EvaluatedBasis eb;
    eb.grid = g;
    for (const auto& m : basis.modes) {
        const ModeGeometry geo = geometry(m, g);
        const bool want_sin = m.kind != ModeKind::cos_only;
        const bool want_cos = m.kind != ModeKind::sin_only;
        PhaseField fs(g), fc(g);
        VectorPhaseField gs(g.d, PhaseField(g)), gc(g.d, PhaseField(g));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double ph = phase_at(geo, g, i);
            const double s = std::sin(ph), c = std::cos(ph);
            fs.values[i] = m.a * s;
            fc.values[i] = m.a * c;
            for (int k = 0; k < g.d; ++k) {
                gs[k].values[i] = m.a * geo.kv[k] * c;
                gc[k].values[i] = -m.a * geo.kv[k] * s;
            }
        }
        if (want_sin) {
            eb.values.push_back(std::move(fs));
            eb.grad_v.push_back(std::move(gs));
        }
        if (want_cos) {
            eb.values.push_back(std::move(fc));
            eb.grad_v.push_back(std::move(gc));
        }
    }
    return eb;
}

std::vector<double> NoisePath::increments(long long step, int n_functions) const {
    if (step < 0 || step >= horizon) throw std::out_of_range("noise path exhausted at step " + std::to_string(step));
    if (stride < 1) throw std::invalid_argument("noise path: stride must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n_functions) * d, 0.0);
    const double scale = std::sqrt(dt / stride);
    for (int s = 0; s < stride; ++s) {
        const std::uint64_t fine = static_cast<std::uint64_t>(step) * stride + s;
        for (int k = 0; k < n_functions; ++k) {
            const auto z = gaussian_pair(seed, fine, static_cast<std::uint32_t>(k), 0u);
            for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(k) * d + c] += z[c] * scale;
        }
    }
    return out;
}

NoiseSample assemble_noise(const EvaluatedBasis& eb, const std::vector<double>& inc) {
    const GridSpec& g = eb.grid;
    const int d = g.d;
    if (inc.size() != static_cast<std::size_t>(eb.count()) * d)
        throw std::invalid_argument("assemble_noise: increment count does not match basis");
    NoiseSample ns{VectorPhaseField(d, PhaseField(g)), PhaseField(g)};
    for (int k = 0; k < eb.count(); ++k) {
        const double* fk = eb.values[k].values.data();
        for (int c = 0; c < d; ++c) {
            const double xi = inc[static_cast<std::size_t>(k) * d + c];
            if (xi == 0.0) continue;
            double* w = ns.dW[c].values.data();
            double* dv = ns.div_v_dW.values.data();
            const double* gk = eb.grad_v[k][c].values.data();
            for (std::size_t i = 0; i < g.size(); ++i) {
                w[i] += fk[i] * xi;
                dv[i] += gk[i] * xi;
            }
        }
    }
    return ns;
}

NoiseSample sample_step(const NoiseBasis& basis, const NoisePath& path, long long step_index, const GridSpec& g) {
    const EvaluatedBasis eb = evaluate_basis(basis, g);
    if (path.d != g.d) throw std::invalid_argument("sample_step: path dimension differs from grid");
    return assemble_noise(eb, path.increments(step_index, eb.count()));
}

}  // namespace kfhd
