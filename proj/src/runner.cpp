#include "kfhd/runner.hpp"

#include "kfhd/aniso_besov.hpp"
#include "kfhd/diagnostics.hpp"
#include "kfhd/kinetic_semigroup.hpp"
#include "kfhd/particle_lab.hpp"
#include "kfhd/spde_engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#ifndef KFHD_VERSION
#define KFHD_VERSION "0.0.0"
#endif

namespace kfhd {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Missing or malformed inputs; mapped to kExitInput.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string now_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string read_text(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw InputError("cannot read " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string snapshot_name(int member, long long step) {
    char buf[64];
    if (member < 0) std::snprintf(buf, sizeof buf, "snap_s%06lld.kfhd", step);
    else std::snprintf(buf, sizeof buf, "snap_m%03d_s%06lld.kfhd", member, step);
    return buf;
}

std::string member_suffix(int member, const char* ext) {
    if (member < 0) return std::string(ext);
    char buf[32];
    std::snprintf(buf, sizeof buf, "_m%03d%s", member, ext);
    return buf;
}

// Owns the output directory and keeps manifest.json in step with what has been written.
class RunDir {
public:
    RunDir(const std::string& dir, RunManifest m) : dir_(dir), m_(std::move(m)) {
        if (dir.empty()) throw InputError("an output directory is required (-o)");
        fs::create_directories(dir_);
        m_.version = code_version();
        m_.started_at = now_utc();
        flush();
    }

    RunManifest& manifest() { return m_; }

    void flush() { write_atomic((dir_ / "manifest.json").string(), manifest_json(m_)); }

    void text(const std::string& name, const std::string& bytes, const std::string& kind) {
        write_atomic((dir_ / name).string(), bytes);
        m_.outputs.push_back({name, kind, -1, -1, 0.0});
    }

    void snapshot(const PhaseField& f, int member, long long step, double t) {
        const std::string name = snapshot_name(member, step);
        const fs::path tmp = dir_ / (name + ".tmp");
        write_snapshot(tmp.string(), f, t);
        fs::rename(tmp, dir_ / name);
        m_.outputs.push_back({name, "snapshot", member, step, t});
    }

    void particles(const ParticleEnsemble& e, long long step) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "particles_s%06lld.kfhdp", step);
        const fs::path tmp = dir_ / (std::string(buf) + ".tmp");
        write_particles(tmp.string(), e);
        fs::rename(tmp, dir_ / buf);
        m_.outputs.push_back({buf, "particles", -1, step, e.t});
    }

    int finish() {
        m_.complete = true;
        m_.status = m_.failures.empty() ? "ok" : "invariant_failure";
        m_.finished_at = now_utc();
        flush();
        return m_.failures.empty() ? kExitOk : kExitInvariant;
    }

    void fail(const std::string& what) {
        m_.complete = false;
        m_.status = "error";
        m_.error = what;
        m_.finished_at = now_utc();
        try {
            flush();
        } catch (...) {
        }
    }

private:
    fs::path dir_;
    RunManifest m_;
};

RunManifest manifest_for(const std::string& command, const RunConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.config_hash = config_hash(cfg);
    m.config_text = serialize_config(cfg);
    m.seed = cfg.scheme.seed;
    m.scheme = to_string(cfg.scheme.scheme);
    m.grid = cfg.grid;
    m.n = cfg.scheme.n;
    m.basis_digest = cfg.basis.digest();
    m.warnings = config_warnings(cfg);
    m.notes.push_back("velocity domain truncated to [-" + num(cfg.grid.L_v) + ", " + num(cfg.grid.L_v) +
                      ") with zero-flux walls; mass within " + num(cfg.monitor.boundary_window) +
                      " L_v of the walls is monitored");
    return m;
}

// Mass drift is a hard bound; clipping and boundary mass are reported as warnings.
void monitor(const Trajectory& tr, const RunConfig& cfg, int member, RunManifest& m) {
    const std::string who = member < 0 ? std::string() : " (member " + std::to_string(member) + ")";
    if (tr.records.empty()) return;
    const double m0 = tr.records.front().mass;
    double drift = 0.0, boundary = 0.0;
    for (const auto& r : tr.records) {
        drift = std::max(drift, std::abs(r.mass - m0) / std::abs(m0));
        boundary = std::max(boundary, r.boundary_fraction);
    }
    if (drift > cfg.monitor.mass_tolerance)
        m.failures.push_back("mass drift " + fmt("%.3e", drift) + " exceeds monitor.mass_tolerance" + who);
    if (tr.max_clipped_fraction > cfg.monitor.clip_threshold)
        m.warnings.push_back("clipping: projection removed a mass fraction of " + fmt("%.3e", tr.max_clipped_fraction) +
                             " in one step" + who);
    if (boundary > cfg.monitor.boundary_threshold)
        m.warnings.push_back("boundary mass: fraction " + fmt("%.3e", boundary) + " inside the velocity window" + who);
}

void store_trajectory(RunDir& out, const Trajectory& tr, int member) {
    for (std::size_t k = 0; k < tr.fields.size(); ++k)
        out.snapshot(tr.fields[k], member, tr.kept_steps[k], static_cast<double>(tr.kept_steps[k]) * tr.dt);
    out.text("diagnostics" + member_suffix(member, ".csv"), records_csv(tr.records), "csv");
}

int cmd_simulate(const RunRequest& req, std::ostream& log, std::optional<RunDir>& slot) {
    const RunConfig cfg = load_config(req.config_path);
    RunDir& out = slot.emplace(req.out_dir, manifest_for("simulate", cfg));
    RunManifest& m = out.manifest();

    const PhaseField f0 = initial_field(cfg);
    const DriftSpec drift = drift_spec(cfg);
    const SpdeEngine probe(cfg.grid, cfg.scheme, cfg.basis, drift, integrate(f0));
    m.notes.push_back("dt " + num(probe.dt()) + ", " + std::to_string(probe.steps()) + " steps, CFL bound " +
                      num(probe.cfl_bound()));
    out.flush();
    log << "simulate: " << probe.steps() << " steps of dt " << probe.dt() << ", " << cfg.output.members
        << " member(s)\n";

    if (probe.steps() == 0) {
        out.snapshot(f0, -1, 0, 0.0);
        return out.finish();
    }

    RunOptions opt;
    opt.keep_every = cfg.output.keep_every;
    if (cfg.output.members == 1) {
        const Trajectory tr = run_nonlinear(f0, cfg.scheme, cfg.basis, drift, opt);
        store_trajectory(out, tr, -1);
        monitor(tr, cfg, -1, m);
    } else {
        const std::vector<Trajectory> ens =
            run_ensemble(f0, cfg.grid, cfg.scheme, cfg.basis, drift, cfg.output.members, opt, req.threads);
        for (int k = 0; k < static_cast<int>(ens.size()); ++k) {
            store_trajectory(out, ens[k], k);
            monitor(ens[k], cfg, k, m);
        }
        if (ens.size() >= 16) {
            const EntropyReport r =
                entropy_dissipation_check(ens, f0, probe.covariance(), cfg.scheme.T, cfg.monitor.entropy_margin);
            ordered_json j;
            j["members"] = r.members;
            j["mean_sup_entropy"] = r.mean_sup_entropy;
            j["mean_fisher"] = r.mean_fisher;
            j["initial_entropy"] = r.initial_entropy;
            j["F3_l1"] = r.F3_l1;
            j["c_F1"] = r.c_F1;
            j["mass_term"] = r.mass_term;
            j["margin"] = r.margin;
            j["lhs"] = r.lhs();
            j["rhs"] = r.rhs();
            j["ok"] = r.ok();
            out.text("entropy.json", j.dump(2) + "\n", "json");
            if (!r.ok()) m.failures.push_back("entropy bound: lhs " + num(r.lhs()) + " > rhs " + num(r.rhs()));
        } else {
            m.notes.push_back("entropy bound needs at least 16 members; skipped");
        }
    }
    for (const auto& f : m.failures) log << "FAILED: " << f << "\n";
    return out.finish();
}

int cmd_particles(const RunRequest& req, std::ostream& log, std::optional<RunDir>& slot) {
    const RunConfig cfg = load_config(req.config_path);
    RunManifest man = manifest_for("particles", cfg);
    man.seed = cfg.particles.seed;
    RunDir& out = slot.emplace(req.out_dir, man);
    RunManifest& m = out.manifest();

    const PhaseField f0 = initial_field(cfg);
    const DriftSpec drift = drift_spec(cfg);
    const ParticleSpec& ps = cfg.particles;
    const ParticleEnsemble init = sample_particles(f0, ps.N, ps.seed, ps.kappa);
    const long long P = static_cast<long long>(std::ceil(ps.T / ps.dt - 1e-9));
    if (P == 0) {
        out.particles(init, 0);
        return out.finish();
    }

    // The PDE reference takes k substeps per particle step so that it stays under its CFL bound.
    SchemeConfig sc = meanfield_scheme(ps.kappa, ps.T);
    sc.n = cfg.scheme.n;
    sc.cfl = cfg.scheme.cfl;
    sc.transport_mode = cfg.scheme.transport_mode;
    const double mass = integrate(f0);
    const double bound = SpdeEngine(cfg.grid, sc, {}, drift, mass).cfl_bound();
    const double particle_dt = ps.T / static_cast<double>(P);
    const long long k = std::max<long long>(1, static_cast<long long>(std::ceil(particle_dt / bound - 1e-12)));
    sc.dt = ps.T / static_cast<double>(P * k);
    m.notes.push_back("particle dt " + num(particle_dt) + "; PDE reference uses " + std::to_string(k) +
                      " substep(s) per particle step");
    out.flush();
    log << "particles: N = " << ps.N << ", " << P << " steps\n";

    const ParticleTrajectory tr = simulate_particles(init, drift.V, particle_config(cfg, req.threads));
    RunOptions opt;
    opt.record = false;
    opt.keep_every = ps.keep_every > 0 ? static_cast<int>(ps.keep_every * k) : 0;
    const Trajectory pde = deterministic_vfp(f0, sc, drift, opt);

    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        const long long step = ps.keep_every > 0 ? static_cast<long long>(i) * ps.keep_every : (i == 0 ? 0 : tr.steps);
        out.particles(tr.snapshots[i], std::min(step, tr.steps));
    }
    const MeanFieldSeries mf = compare_meanfield(tr, pde, particle_bandwidth(cfg));
    std::ostringstream csv;
    csv << "t,distance,mc_distance\n";
    for (std::size_t i = 0; i < mf.t.size(); ++i)
        csv << num(mf.t[i]) << "," << num(mf.distance[i]) << "," << num(mf.mc_distance[i]) << "\n";
    out.text("meanfield.csv", csv.str(), "csv");
    std::ostringstream mom;
    mom << "step,momentum\n";
    for (std::size_t i = 0; i < tr.momentum.size(); ++i) mom << i << "," << num(tr.momentum[i]) << "\n";
    out.text("momentum.csv", mom.str(), "csv");
    log << "particles: terminal L1 distance " << mf.terminal() << "\n";
    return out.finish();
}

struct MemberSnapshots {
    std::vector<long long> steps;
    std::vector<std::string> files;
};

int cmd_diagnose(const RunRequest& req, std::ostream& log, std::optional<RunDir>& slot) {
    const fs::path in(req.input);
    if (req.input.empty() || !fs::is_directory(in)) throw InputError("no such run directory: " + req.input);
    if (!fs::exists(in / "manifest.json")) throw InputError("no manifest.json in " + req.input);
    const RunManifest src = parse_manifest(read_text(in / "manifest.json"));
    if (!src.complete) throw InputError("run in " + req.input + " is incomplete");
    if (src.command != "simulate") throw InputError("diagnose expects the output of `simulate`");
    const RunConfig cfg = parse_config(src.config_text);

    std::map<int, MemberSnapshots> members;
    for (const auto& o : src.outputs) {
        if (o.kind != "snapshot") continue;
        if (!fs::exists(in / o.file)) throw InputError("missing snapshot " + (in / o.file).string());
        members[o.member].steps.push_back(o.step);
        members[o.member].files.push_back((in / o.file).string());
    }
    if (members.empty()) throw InputError("no snapshots in " + req.input);

    const std::string out_dir = req.out_dir.empty() ? (in / "diagnose").string() : req.out_dir;
    RunDir& out = slot.emplace(out_dir, manifest_for("diagnose", cfg));
    RunManifest& m = out.manifest();
    m.notes.push_back("source run " + src.config_hash);

    const double window = cfg.monitor.boundary_window;
    ordered_json summary;
    summary["config_hash"] = src.config_hash;
    std::vector<PhaseField> first_member;
    for (const auto& [member, snaps] : members) {
        std::vector<DiagnosticsRecord> recs;
        std::vector<PhaseField> fields;
        for (const auto& file : snaps.files) {
            double t = 0.0;
            fields.push_back(read_snapshot(file, &t));
            if (!(fields.back().grid == cfg.grid)) throw InputError("snapshot grid differs from the run config: " + file);
            recs.push_back(record(fields.back(), t, 0.0, window));
        }
        out.text("records" + member_suffix(member, ".csv"), records_csv(recs), "csv");
        const std::string who = member < 0 ? std::string() : " (member " + std::to_string(member) + ")";
        double drift = 0.0, fmin = 0.0;
        for (const auto& r : recs) {
            drift = std::max(drift, std::abs(r.mass - recs.front().mass) / std::abs(recs.front().mass));
            fmin = std::min(fmin, r.min);
        }
        if (drift > cfg.monitor.mass_tolerance)
            m.failures.push_back("mass drift " + fmt("%.3e", drift) + " exceeds monitor.mass_tolerance" + who);
        if (fmin < 0.0) m.failures.push_back("negative density " + fmt("%.3e", fmin) + who);
        ordered_json j;
        j["member"] = member;
        j["snapshots"] = recs.size();
        j["mass_drift"] = drift;
        j["min"] = fmin;
        j["entropy_initial"] = recs.front().entropy;
        j["entropy_final"] = recs.back().entropy;
        j["max_boundary_fraction"] = std::max_element(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
                                         return a.boundary_fraction < b.boundary_fraction;
                                     })->boundary_fraction;
        summary["members"].push_back(j);
        if (first_member.empty()) first_member = std::move(fields);
    }

    const PhaseField& last = first_member.back();
    const KineticProfile kp = kinetic_profile(last, default_zeta_grid(last));
    std::ostringstream kcsv;
    kcsv << "zeta,p\n";
    for (std::size_t l = 0; l < kp.zeta.size(); ++l) kcsv << num(kp.zeta[l]) << "," << num(kp.p[l]) << "\n";
    out.text("kinetic_profile.csv", kcsv.str(), "csv");

    // Residuals need the state at every step of a single trajectory.
    const SpdeEngine engine(cfg.grid, cfg.scheme, cfg.basis, drift_spec(cfg), integrate(first_member.front()));
    const MemberSnapshots& s0 = members.begin()->second;
    bool every_step = members.size() == 1 && members.begin()->first < 0 &&
                      static_cast<long long>(s0.steps.size()) == engine.steps() + 1 && engine.steps() > 0;
    for (std::size_t i = 0; every_step && i < s0.steps.size(); ++i) every_step = s0.steps[i] == static_cast<long long>(i);
    if (every_step) {
        Trajectory tr;
        tr.dt = engine.dt();
        tr.steps = engine.steps();
        tr.fields = first_member;
        for (long long i = 0; i <= tr.steps; ++i) tr.kept_steps.push_back(i);
        TestFunction phi;
        phi.v_half_width = cfg.grid.L_v * (1.0 - window);
        phi.p0 = 1.0;
        phi.p2 = 1.0;
        double fmax = 0.0;
        for (double x : tr.fields.front().values) fmax = std::max(fmax, x);
        const Renormalizer S{0.02 * fmax, fmax};
        const ResidualSeries weak = weak_residual(engine, tr, phi, window);
        const ResidualSeries kin = kinetic_residual(engine, tr, phi, S, window);
        std::ostringstream rcsv;
        rcsv << "t,weak,kinetic\n";
        for (std::size_t i = 0; i < weak.t.size(); ++i)
            rcsv << num(weak.t[i]) << "," << num(weak.residual[i]) << "," << num(kin.residual[i]) << "\n";
        out.text("residuals.csv", rcsv.str(), "csv");
        summary["weak_residual_max"] = weak.max();
        summary["kinetic_residual_max"] = kin.max();
    } else {
        m.notes.push_back("residuals skipped: they need a single trajectory stored at every step (output.keep_every = 1)");
    }
    summary["failures"] = m.failures;
    out.text("summary.json", summary.dump(2) + "\n", "json");
    for (const auto& f : m.failures) log << "FAILED: " << f << "\n";
    log << "diagnose: " << members.size() << " trajectory(ies), " << m.failures.size() << " failure(s)\n";
    return out.finish();
}

int cmd_besov(const RunRequest& req, std::ostream& log, std::optional<RunDir>& slot) {
    const RunConfig cfg = req.config_path.empty() ? RunConfig{} : load_config(req.config_path);
    if (req.input.empty() || !fs::exists(req.input)) throw InputError("no such snapshot: " + req.input);
    double t = 0.0;
    PhaseField f;
    try {
        f = read_snapshot(req.input, &t);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    const double s = req.besov_s.value_or(cfg.besov.s);
    const double p = req.besov_p.value_or(cfg.besov.p);
    if (!(p >= 1.0)) throw ConfigError("besov.p", "must be >= 1");
    RunManifest man = manifest_for("besov", cfg);
    man.grid = f.grid;
    RunDir& out = slot.emplace(req.out_dir, man);
    const AnisoDecomposition dec(f.grid);
    const BesovReport r = besov_norm(dec, f, s, p);
    std::ostringstream csv;
    csv << "j,block_norm\n";
    for (std::size_t i = 0; i < r.j.size(); ++i) csv << r.j[i] << "," << num(r.block_norms[i]) << "\n";
    out.text("besov.csv", csv.str(), "csv");
    ordered_json j;
    j["snapshot_t"] = t;
    j["s"] = s;
    j["p"] = p;
    j["norm"] = r.norm;
    out.text("besov.json", j.dump(2) + "\n", "json");
    log << "besov: norm " << r.norm << " (s = " << s << ", p = " << p << ")\n";
    return out.finish();
}

int cmd_kernel(const RunRequest& req, std::ostream& log, std::optional<RunDir>& slot) {
    const RunConfig cfg = req.config_path.empty() ? RunConfig{} : load_config(req.config_path);
    RunDir& out = slot.emplace(req.out_dir, manifest_for("kernel", cfg));
    const MomentSpec& ms = cfg.moments;
    const int j_max = AnisoDecomposition(cfg.grid).j_max();
    if (ms.j_hi > j_max)
        throw ConfigError("moments.j_hi", "exceeds the finest block " + std::to_string(j_max) + " resolved by the grid");
    std::ostringstream csv;
    csv << "j,t,I_j\n";
    for (double t : ms.t)
        for (const MomentRow& row : kernel_moment_scan(cfg.grid, ms.j_lo, ms.j_hi, t, ms.alpha, ms.beta, ms.m, ms.n))
            csv << row.j << "," << num(row.t) << "," << num(row.I) << "\n";
    out.text("kernel_moments.csv", csv.str(), "csv");
    log << "kernel: " << ms.t.size() << " time(s), j = " << ms.j_lo << ".." << ms.j_hi << "\n";
    return out.finish();
}

}  // namespace

const char* code_version() { return KFHD_VERSION; }

std::string manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["complete"] = m.complete;
    j["status"] = m.status;
    if (!m.error.empty()) j["error"] = m.error;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["scheme"] = m.scheme;
    j["grid"] = {{"d", m.grid.d}, {"L_x", m.grid.L_x}, {"L_v", m.grid.L_v}, {"n_x", m.grid.n_x}, {"n_v", m.grid.n_v}};
    j["n"] = m.n;
    j["basis_digest"] = m.basis_digest;
    j["version"] = m.version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = ordered_json::array();
    for (const auto& o : m.outputs) {
        ordered_json e;
        e["file"] = o.file;
        e["kind"] = o.kind;
        if (o.member >= 0) e["member"] = o.member;
        if (o.step >= 0) {
            e["step"] = o.step;
            e["t"] = o.t;
        }
        j["outputs"].push_back(e);
    }
    j["warnings"] = m.warnings;
    j["failures"] = m.failures;
    j["notes"] = m.notes;
    j["config"] = m.config_text;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    RunManifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.complete = j.at("complete").get<bool>();
        m.status = j.value("status", "");
        m.error = j.value("error", "");
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scheme = j.value("scheme", "");
        const auto& g = j.at("grid");
        m.grid = make_grid(g.at("L_x").get<double>(), g.at("L_v").get<double>(), g.at("n_x").get<int>(),
                           g.at("n_v").get<int>(), g.at("d").get<int>());
        m.n = j.value("n", 0);
        m.basis_digest = j.value("basis_digest", "");
        m.version = j.value("version", "");
        m.started_at = j.value("started_at", "");
        m.finished_at = j.value("finished_at", "");
        for (const auto& e : j.at("outputs"))
            m.outputs.push_back({e.at("file").get<std::string>(), e.at("kind").get<std::string>(), e.value("member", -1),
                                 e.value("step", -1LL), e.value("t", 0.0)});
        m.warnings = j.value("warnings", std::vector<std::string>{});
        m.failures = j.value("failures", std::vector<std::string>{});
        m.notes = j.value("notes", std::vector<std::string>{});
        m.config_text = j.at("config").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void write_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << bytes;
        if (!os.flush()) throw std::runtime_error("write failed for " + tmp);
    }
    fs::rename(tmp, path);
}

int orchestrate(const RunRequest& req, std::ostream& log) {
    std::optional<RunDir> active;
    try {
        if (req.command == "simulate") return cmd_simulate(req, log, active);
        if (req.command == "particles") return cmd_particles(req, log, active);
        if (req.command == "diagnose") return cmd_diagnose(req, log, active);
        if (req.command == "besov") return cmd_besov(req, log, active);
        if (req.command == "kernel") return cmd_kernel(req, log, active);
        throw InputError("unknown command '" + req.command + "'");
    } catch (const ConfigError& e) {
        if (active) active->fail(e.what());
        log << "config error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InputError& e) {
        if (active) active->fail(e.what());
        log << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        if (active) active->fail(e.what());
        log << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        if (active) active->fail(e.what());
        log << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

}  // namespace kfhd
