#pragma once

#include "kfhd/coefficient_kit.hpp"
#include "kfhd/noise_model.hpp"
#include "kfhd/particle_lab.hpp"
#include "kfhd/phase_grid.hpp"
#include "kfhd/spde_engine.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kfhd {

// Validation failure tied to one dotted config key, e.g. "grid.n_x".
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& msg)
        : std::invalid_argument(key + ": " + msg), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct KernelSpec {
    std::string shape = "none";  // none | sine
    double amplitude = 0.0;
    int k = 1;
};

// f0 = (1 + amplitude cos(kx pi x / L_x)) exp(-|v - mean|^2 / (2 variance)) scaled to `mass`, or a snapshot file.
struct InitialSpec {
    std::string type = "maxwellian";  // maxwellian | file
    double mean = 0.0;
    double variance = 1.0;
    double amplitude = 0.0;
    int kx = 1;
    double mass = 1.0;
    std::string path;
};

struct OutputSpec {
    int keep_every = 0;  // snapshot stride in steps; 0 writes the initial and final states
    int members = 1;
};

struct MonitorSpec {
    double boundary_window = 0.1;      // fraction of L_v counted as the velocity boundary layer
    double boundary_threshold = 1e-4;  // warn when the boundary layer holds more than this mass fraction
    double clip_threshold = 1e-6;      // largest mass fraction the positivity projection may remove per step
    double mass_tolerance = 1e-10;     // relative mass drift allowed by diagnose
    double entropy_margin = 1.2;
};

struct ParticleSpec {
    int N = 10000;
    double kappa = 1.0;
    double dt = 0.01;
    double T = 1.0;
    std::string force = "binned";
    double bandwidth_x = 0.2;
    double bandwidth_v = 0.2;
    std::uint64_t seed = 1;
    int keep_every = 0;
};

struct BesovSpec {
    double s = 1.0;
    double p = 2.0;
};

struct MomentSpec {
    int j_lo = 0;
    int j_hi = 3;  // must not exceed the finest block the grid resolves
    std::vector<double> t{0.1, 0.5, 1.0};
    double alpha = 0.0;
    double beta = 0.0;
    int m = 0;
    int n = 0;
};

struct RunConfig {
    std::string preset;  // empty or "standard"
    GridSpec grid{3.14159265358979323846, 6.0, 64, 64, 1};
    SchemeConfig scheme;
    NoiseBasis basis;
    double f1_threshold = 0.1;
    TruncationKit truncation;
    KernelSpec kernel;
    InitialSpec initial;
    OutputSpec output;
    MonitorSpec monitor;
    ParticleSpec particles;
    BesovSpec besov;
    MomentSpec moments;
};

// Defaults shared by the regression tests and the `standard` preset.
RunConfig standard_config();

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

// Canonical YAML with every key in a fixed order and round-trip precision.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Range and consistency checks, including the CFL bound for an explicit dt. Throws ConfigError.
void validate_config(const RunConfig& cfg);

// Non-fatal conditions worth recording, e.g. sup F1 above noise.f1_threshold.
std::vector<std::string> config_warnings(const RunConfig& cfg);

PhaseField initial_field(const RunConfig& cfg);
DriftSpec drift_spec(const RunConfig& cfg);
ParticleConfig particle_config(const RunConfig& cfg, int threads = 0);
// Configured bandwidths, raised to the grid spacing on coarse grids.
Bandwidth particle_bandwidth(const RunConfig& cfg);

}  // namespace kfhd
