#include "kfhd/config.hpp"

#include "kfhd/standard.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace kfhd {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class T>
const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
}

// Reads one mapping, remembering which keys were consumed so leftovers can be reported.
class Section {
public:
    Section(YAML::Node node, std::string prefix) : node_(std::move(node)), prefix_(std::move(prefix)) {
        present_ = node_ && !node_.IsNull();
        if (present_ && !node_.IsMap()) throw ConfigError(trimmed(), "expected a mapping");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!present_) return;
        const YAML::Node n = node_[key];
        if (!n || n.IsNull()) return;
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(prefix_ + key, std::string("expected ") + type_name<T>());
        }
    }

    YAML::Node child(const std::string& key) {
        seen_.insert(key);
        if (!present_) return {};
        const YAML::Node n = node_[key];
        return n && !n.IsNull() ? n : YAML::Node();
    }

    Section section(const std::string& key) { return Section(child(key), prefix_ + key + "."); }

    void finish() const {
        if (!present_) return;
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (!seen_.count(k)) throw ConfigError(prefix_ + k, "unknown key");
        }
    }

private:
    std::string trimmed() const { return prefix_.empty() ? "<root>" : prefix_.substr(0, prefix_.size() - 1); }

    YAML::Node node_;
    bool present_ = false;
    std::string prefix_;
    std::set<std::string> seen_;
};

ModeKind kind_from_string(const std::string& s, const std::string& key) {
    if (s == "pair") return ModeKind::pair;
    if (s == "sin") return ModeKind::sin_only;
    if (s == "cos") return ModeKind::cos_only;
    throw ConfigError(key, "expected pair, sin or cos");
}

const char* kind_name(ModeKind k) { return k == ModeKind::pair ? "pair" : (k == ModeKind::sin_only ? "sin" : "cos"); }

std::array<int, 2> read_wavevector(const YAML::Node& n, const std::string& key) {
    std::array<int, 2> out{0, 0};
    if (!n || n.IsNull()) return out;
    try {
        if (n.IsScalar()) {
            out[0] = n.as<int>();
            return out;
        }
        if (!n.IsSequence() || n.size() < 1 || n.size() > 2) throw ConfigError(key, "expected 1 or 2 integers");
        for (std::size_t i = 0; i < n.size(); ++i) out[i] = n[i].as<int>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key, "expected 1 or 2 integers");
    }
    return out;
}

void read_modes(const YAML::Node& n, NoiseBasis& basis) {
    if (!n || n.IsNull()) return;
    if (!n.IsSequence()) throw ConfigError("noise.modes", "expected a list of modes");
    basis.modes.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string key = "noise.modes[" + std::to_string(i) + "]";
        Section s(n[i], key + ".");
        NoiseMode m;
        s.get("a", m.a);
        m.kx = read_wavevector(s.child("kx"), key + ".kx");
        m.kv = read_wavevector(s.child("kv"), key + ".kv");
        std::string kind = "pair";
        s.get("kind", kind);
        m.kind = kind_from_string(kind, key + ".kind");
        s.finish();
        basis.modes.push_back(m);
    }
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s = buf;
    // Keep floats recognizable as such when read back.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(key, msg);
}

}  // namespace

RunConfig standard_config() {
    const StandardSetup s = standard_setup();
    RunConfig c;
    c.preset = "standard";
    c.grid = s.grid;
    c.scheme = s.scheme;
    c.basis = s.basis;
    c.kernel = {"sine", 0.5, 1};
    c.initial.mean = 0.5;
    c.initial.variance = 0.4;
    c.initial.amplitude = 0.3;
    c.initial.kx = 1;
    return c;
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<root>", std::string("not valid YAML: ") + e.what());
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    Section top(root, "");
    std::string preset;
    top.get("preset", preset);
    RunConfig c;
    if (preset == "standard") c = standard_config();
    else if (!preset.empty()) throw ConfigError("preset", "unknown preset '" + preset + "' (expected standard)");

    {
        Section s = top.section("grid");
        s.get("d", c.grid.d);
        s.get("L_x", c.grid.L_x);
        s.get("L_v", c.grid.L_v);
        s.get("n_x", c.grid.n_x);
        s.get("n_v", c.grid.n_v);
        s.finish();
    }
    {
        Section s = top.section("time");
        s.get("T", c.scheme.T);
        s.get("dt", c.scheme.dt);
        s.get("cfl", c.scheme.cfl);
        s.finish();
    }
    {
        Section s = top.section("scheme");
        std::string type = to_string(c.scheme.scheme), mode = to_string(c.scheme.transport_mode);
        s.get("type", type);
        s.get("transport_mode", mode);
        s.get("iterations", c.scheme.iterations);
        s.finish();
        try {
            c.scheme.scheme = scheme_from_string(type);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("scheme.type", e.what());
        }
        try {
            c.scheme.transport_mode = transport_from_string(mode);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("scheme.transport_mode", e.what());
        }
    }
    {
        Section s = top.section("physics");
        s.get("diffusion", c.scheme.diffusion);
        s.get("friction", c.scheme.friction);
        s.get("transport", c.scheme.transport);
        s.finish();
    }
    {
        Section s = top.section("noise");
        s.get("eps", c.scheme.eps);
        s.get("seed", c.scheme.seed);
        s.get("stride", c.scheme.noise_stride);
        s.get("f1_threshold", c.f1_threshold);
        read_modes(s.child("modes"), c.basis);
        s.finish();
    }
    {
        Section s = top.section("coeff");
        s.get("n", c.scheme.n);
        s.get("delta", c.truncation.delta);
        s.get("beta", c.truncation.beta);
        s.get("M", c.truncation.M);
        s.get("R1", c.truncation.R1);
        s.get("R2", c.truncation.R2);
        s.finish();
    }
    {
        Section s = top.section("kernel");
        s.get("shape", c.kernel.shape);
        s.get("amplitude", c.kernel.amplitude);
        s.get("k", c.kernel.k);
        s.finish();
    }
    {
        Section s = top.section("initial");
        s.get("type", c.initial.type);
        s.get("mean", c.initial.mean);
        s.get("variance", c.initial.variance);
        s.get("amplitude", c.initial.amplitude);
        s.get("kx", c.initial.kx);
        s.get("mass", c.initial.mass);
        s.get("path", c.initial.path);
        s.finish();
    }
    {
        Section s = top.section("output");
        s.get("keep_every", c.output.keep_every);
        s.get("members", c.output.members);
        s.finish();
    }
    {
        Section s = top.section("monitor");
        s.get("boundary_window", c.monitor.boundary_window);
        s.get("boundary_threshold", c.monitor.boundary_threshold);
        s.get("clip_threshold", c.monitor.clip_threshold);
        s.get("mass_tolerance", c.monitor.mass_tolerance);
        s.get("entropy_margin", c.monitor.entropy_margin);
        s.finish();
    }
    {
        Section s = top.section("particles");
        s.get("N", c.particles.N);
        s.get("kappa", c.particles.kappa);
        s.get("dt", c.particles.dt);
        s.get("T", c.particles.T);
        s.get("force", c.particles.force);
        s.get("bandwidth_x", c.particles.bandwidth_x);
        s.get("bandwidth_v", c.particles.bandwidth_v);
        s.get("seed", c.particles.seed);
        s.get("keep_every", c.particles.keep_every);
        s.finish();
    }
    {
        Section s = top.section("besov");
        s.get("s", c.besov.s);
        s.get("p", c.besov.p);
        s.finish();
    }
    {
        Section s = top.section("moments");
        s.get("j_lo", c.moments.j_lo);
        s.get("j_hi", c.moments.j_hi);
        const YAML::Node t = s.child("t");
        if (t && !t.IsNull()) {
            try {
                c.moments.t = t.IsSequence() ? t.as<std::vector<double>>() : std::vector<double>{t.as<double>()};
            } catch (const YAML::Exception&) {
                throw ConfigError("moments.t", "expected a number or a list of numbers");
            }
        }
        s.get("alpha", c.moments.alpha);
        s.get("beta", c.moments.beta);
        s.get("m", c.moments.m);
        s.get("n", c.moments.n);
        s.finish();
    }
    top.finish();
    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("<file>", "cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    if (!c.preset.empty()) os << "preset: " << quoted(c.preset) << "\n";
    os << "grid:\n  d: " << c.grid.d << "\n  L_x: " << num(c.grid.L_x) << "\n  L_v: " << num(c.grid.L_v)
       << "\n  n_x: " << c.grid.n_x << "\n  n_v: " << c.grid.n_v << "\n";
    os << "time:\n  T: " << num(c.scheme.T) << "\n  dt: " << num(c.scheme.dt) << "\n  cfl: " << num(c.scheme.cfl) << "\n";
    os << "scheme:\n  type: " << to_string(c.scheme.scheme) << "\n  transport_mode: " << to_string(c.scheme.transport_mode)
       << "\n  iterations: " << c.scheme.iterations << "\n";
    os << "physics:\n  diffusion: " << num(c.scheme.diffusion) << "\n  friction: " << num(c.scheme.friction)
       << "\n  transport: " << (c.scheme.transport ? "true" : "false") << "\n";
    os << "noise:\n  eps: " << num(c.scheme.eps) << "\n  seed: " << c.scheme.seed << "\n  stride: " << c.scheme.noise_stride
       << "\n  f1_threshold: " << num(c.f1_threshold) << "\n  modes:";
    if (c.basis.modes.empty()) os << " []";
    os << "\n";
    for (const auto& m : c.basis.modes)
        os << "    - {a: " << num(m.a) << ", kx: [" << m.kx[0] << ", " << m.kx[1] << "], kv: [" << m.kv[0] << ", " << m.kv[1]
           << "], kind: " << kind_name(m.kind) << "}\n";
    os << "coeff:\n  n: " << c.scheme.n << "\n  delta: " << num(c.truncation.delta) << "\n  beta: " << num(c.truncation.beta)
       << "\n  M: " << num(c.truncation.M) << "\n  R1: " << num(c.truncation.R1) << "\n  R2: " << num(c.truncation.R2) << "\n";
    os << "kernel:\n  shape: " << quoted(c.kernel.shape) << "\n  amplitude: " << num(c.kernel.amplitude)
       << "\n  k: " << c.kernel.k << "\n";
    os << "initial:\n  type: " << quoted(c.initial.type) << "\n  mean: " << num(c.initial.mean)
       << "\n  variance: " << num(c.initial.variance) << "\n  amplitude: " << num(c.initial.amplitude)
       << "\n  kx: " << c.initial.kx << "\n  mass: " << num(c.initial.mass) << "\n  path: " << quoted(c.initial.path) << "\n";
    os << "output:\n  keep_every: " << c.output.keep_every << "\n  members: " << c.output.members << "\n";
    os << "monitor:\n  boundary_window: " << num(c.monitor.boundary_window)
       << "\n  boundary_threshold: " << num(c.monitor.boundary_threshold)
       << "\n  clip_threshold: " << num(c.monitor.clip_threshold) << "\n  mass_tolerance: " << num(c.monitor.mass_tolerance)
       << "\n  entropy_margin: " << num(c.monitor.entropy_margin) << "\n";
    os << "particles:\n  N: " << c.particles.N << "\n  kappa: " << num(c.particles.kappa) << "\n  dt: " << num(c.particles.dt)
       << "\n  T: " << num(c.particles.T) << "\n  force: " << quoted(c.particles.force)
       << "\n  bandwidth_x: " << num(c.particles.bandwidth_x) << "\n  bandwidth_v: " << num(c.particles.bandwidth_v)
       << "\n  seed: " << c.particles.seed << "\n  keep_every: " << c.particles.keep_every << "\n";
    os << "besov:\n  s: " << num(c.besov.s) << "\n  p: " << num(c.besov.p) << "\n";
    os << "moments:\n  j_lo: " << c.moments.j_lo << "\n  j_hi: " << c.moments.j_hi << "\n  t: [";
    for (std::size_t i = 0; i < c.moments.t.size(); ++i) os << (i ? ", " : "") << num(c.moments.t[i]);
    os << "]\n  alpha: " << num(c.moments.alpha) << "\n  beta: " << num(c.moments.beta) << "\n  m: " << c.moments.m
       << "\n  n: " << c.moments.n << "\n";
    return os.str();
}

std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate_config(const RunConfig& c) {
    const GridSpec& g = c.grid;
    require(g.d == 1 || g.d == 2, "grid.d", "must be 1 or 2");
    require(g.n_x >= 8 && g.n_x % 2 == 0, "grid.n_x", "must be even and >= 8");
    require(g.n_v >= 8 && g.n_v % 2 == 0, "grid.n_v", "must be even and >= 8");
    require(g.L_x > 0.0 && std::isfinite(g.L_x), "grid.L_x", "must be positive");
    require(g.L_v > 0.0 && std::isfinite(g.L_v), "grid.L_v", "must be positive");

    const SchemeConfig& s = c.scheme;
    require(s.T >= 0.0 && std::isfinite(s.T), "time.T", "must be >= 0");
    require(s.dt >= 0.0 && std::isfinite(s.dt), "time.dt", "must be >= 0 (0 selects the CFL step)");
    require(s.cfl > 0.0 && std::isfinite(s.cfl), "time.cfl", "must be positive");
    require(s.iterations >= 1, "scheme.iterations", "must be >= 1");
    require(s.diffusion >= 0.0, "physics.diffusion", "must be >= 0");
    require(s.friction >= 0.0, "physics.friction", "must be >= 0");
    require(s.eps >= 0.0 && s.eps <= 1.0, "noise.eps", "must lie in [0, 1]");
    require(s.noise_stride >= 1, "noise.stride", "must be >= 1");
    require(c.f1_threshold > 0.0, "noise.f1_threshold", "must be positive");
    require(s.n >= 1, "coeff.n", "must be a positive integer");
    require(c.truncation.delta > 0.0 && c.truncation.delta < 1.0, "coeff.delta", "must lie in (0, 1)");
    require(c.truncation.beta > 0.0, "coeff.beta", "must be positive");
    require(c.truncation.M > 0.0, "coeff.M", "must be positive");
    require(c.truncation.R1 > 0.0, "coeff.R1", "must be positive");
    require(c.truncation.R2 > 0.0, "coeff.R2", "must be positive");
    if (s.eps > 0.0) require(!c.basis.modes.empty(), "noise.modes", "eps > 0 needs a noise basis");
    for (std::size_t i = 0; i < c.basis.modes.size(); ++i) {
        NoiseBasis one;
        one.modes = {c.basis.modes[i]};
        try {
            one.validate(g);
        } catch (const std::invalid_argument& e) {
            std::string msg = e.what();
            const auto colon = msg.find(": ");
            if (colon != std::string::npos) msg = msg.substr(colon + 2);
            throw ConfigError("noise.modes[" + std::to_string(i) + "]", msg);
        }
    }

    require(c.kernel.shape == "none" || c.kernel.shape == "sine", "kernel.shape", "expected none or sine");
    require(std::isfinite(c.kernel.amplitude), "kernel.amplitude", "must be finite");
    require(c.kernel.k >= 0 && c.kernel.k < g.n_x / 2, "kernel.k", "must lie in [0, n_x/2)");

    require(c.initial.type == "maxwellian" || c.initial.type == "file", "initial.type", "expected maxwellian or file");
    if (c.initial.type == "file") require(!c.initial.path.empty(), "initial.path", "required when initial.type is file");
    require(c.initial.variance > 0.0, "initial.variance", "must be positive");
    require(std::abs(c.initial.amplitude) < 1.0, "initial.amplitude", "must lie in (-1, 1) to keep f0 positive");
    require(c.initial.kx >= 0 && c.initial.kx < g.n_x / 2, "initial.kx", "must lie in [0, n_x/2)");
    require(c.initial.mass > 0.0, "initial.mass", "must be positive");

    require(c.output.keep_every >= 0, "output.keep_every", "must be >= 0");
    require(c.output.members >= 1, "output.members", "must be >= 1");
    require(c.monitor.boundary_window > 0.0 && c.monitor.boundary_window < 1.0, "monitor.boundary_window",
            "must lie in (0, 1)");
    require(c.monitor.boundary_threshold > 0.0, "monitor.boundary_threshold", "must be positive");
    require(c.monitor.clip_threshold >= 0.0, "monitor.clip_threshold", "must be >= 0");
    require(c.monitor.mass_tolerance > 0.0, "monitor.mass_tolerance", "must be positive");
    require(c.monitor.entropy_margin >= 1.0, "monitor.entropy_margin", "must be >= 1");

    const ParticleSpec& p = c.particles;
    require(p.N >= 1, "particles.N", "must be >= 1");
    require(p.kappa >= 0.0, "particles.kappa", "must be >= 0");
    require(p.dt > 0.0 && p.dt * p.kappa < 1.0, "particles.dt", "must be positive with dt * kappa < 1");
    require(p.T >= 0.0, "particles.T", "must be >= 0");
    require(p.force == "direct" || p.force == "binned", "particles.force", "expected direct or binned");
    require(p.bandwidth_x > 0.0, "particles.bandwidth_x", "must be positive");
    require(p.bandwidth_v > 0.0, "particles.bandwidth_v", "must be positive");
    require(p.keep_every >= 0, "particles.keep_every", "must be >= 0");

    require(c.besov.p >= 1.0, "besov.p", "must be >= 1");
    require(c.moments.j_lo >= -1 && c.moments.j_hi >= c.moments.j_lo, "moments.j_hi", "need -1 <= j_lo <= j_hi");
    require(!c.moments.t.empty(), "moments.t", "needs at least one time");
    for (double t : c.moments.t) require(t > 0.0, "moments.t", "times must be positive");
    require(c.moments.m >= 0 && c.moments.n >= 0, "moments.m", "derivative orders must be >= 0");

    // An explicit step has to respect the stability bound of the engine built from this config.
    if (s.dt > 0.0) {
        try {
            const SpdeEngine e(g, s, c.basis, drift_spec(c), c.initial.mass);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("time.dt", e.what());
        }
    }
}

std::vector<std::string> config_warnings(const RunConfig& c) {
    std::vector<std::string> w;
    if (c.scheme.eps > 0.0 && !c.basis.modes.empty()) {
        const CovarianceFields cov = covariance_fields(c.basis, c.grid);
        double F1 = 0.0;
        for (double x : cov.F1.values) F1 = std::max(F1, x);
        if (!(F1 < c.f1_threshold)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "sup F1 = %.6g is not below noise.f1_threshold = %.6g", F1, c.f1_threshold);
            w.push_back(buf);
        }
    }
    return w;
}

PhaseField initial_field(const RunConfig& c) {
    if (c.initial.type == "file") {
        PhaseField f = read_snapshot(c.initial.path);
        if (!(f.grid == c.grid)) throw ConfigError("initial.path", "snapshot grid does not match the configured grid");
        return f;
    }
    const GridSpec& g = c.grid;
    const InitialSpec& in = c.initial;
    PhaseField f = sample_field(g, [&](const double* x, const double* v) {
        double mod = 1.0, r2 = 0.0;
        for (int k = 0; k < g.d; ++k) {
            mod *= 1.0 + in.amplitude * std::cos(kPi * in.kx * x[k] / g.L_x);
            r2 += (v[k] - in.mean) * (v[k] - in.mean);
        }
        return mod * std::exp(-0.5 * r2 / in.variance);
    });
    normalize_mass(f, in.mass);
    return f;
}

DriftSpec drift_spec(const RunConfig& c) {
    if (c.kernel.shape == "none" || c.kernel.amplitude == 0.0) return {};
    return sinusoidal_kernel(c.grid, c.kernel.amplitude, c.kernel.k);
}

ParticleConfig particle_config(const RunConfig& c, int threads) {
    ParticleConfig p;
    p.T = c.particles.T;
    p.dt = c.particles.dt;
    p.force = force_from_string(c.particles.force);
    p.keep_every = c.particles.keep_every;
    p.threads = threads;
    return p;
}

Bandwidth particle_bandwidth(const RunConfig& c) {
    return {std::max(c.particles.bandwidth_x, c.grid.h_x()), std::max(c.particles.bandwidth_v, c.grid.h_v())};
}

}  // namespace kfhd
