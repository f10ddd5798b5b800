#pragma once

#include "kfhd/coefficient_kit.hpp"
#include "kfhd/noise_model.hpp"
#include "kfhd/phase_grid.hpp"
#include "kfhd/record.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kfhd {

enum class Scheme { nonlinear_direct, linear_iteration, frozen_drift };
enum class TransportMode { finite_volume, spectral_split };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
std::string to_string(TransportMode m);
TransportMode transport_from_string(const std::string& s);

struct SchemeConfig {
    double dt = 0.0;  // 0 selects the CFL step
    double T = 1.0;
    Scheme scheme = Scheme::nonlinear_direct;
    int n = 64;
    double eps = 0.0;  // noise amplitude
    double diffusion = 1.0;
    double friction = 1.0;
    bool transport = true;
    TransportMode transport_mode = TransportMode::finite_volume;
    double cfl = 0.4;
    std::uint64_t seed = 0;
    int iterations = 3;  // linear iteration count
    int noise_stride = 1;  // fine Brownian increments summed per step, for nested refinements
};

struct DriftSpec {
    enum class Source { none, convolution, frozen };
    Source source = Source::none;
    VectorSpatialField V;  // interaction kernel on the spatial grid, centered at node n_x/2
    VectorSpatialField b;  // frozen drift field
};

// Bounded sinusoidal kernel V(x) = amplitude * sin(pi k x / L_x) per component.
DriftSpec sinusoidal_kernel(const GridSpec& g, double amplitude, int k = 1);

struct StepStats {
    double clipped = 0.0;       // mass removed by the projection
    double min_before = 0.0;    // minimum before the projection
};

struct RunOptions {
    int keep_every = 0;  // store every k-th field; 0 keeps only the endpoints
    bool record = true;
};

struct Trajectory {
    double dt = 0.0;
    long long steps = 0;
    std::vector<long long> kept_steps;
    std::vector<PhaseField> fields;
    std::vector<DiagnosticsRecord> records;  // one per step including t = 0
    double max_clipped_fraction = 0.0;
    const PhaseField& final() const { return fields.back(); }
};

struct LinearIterationResult {
    std::vector<Trajectory> iterates;  // f_1 ... f_K
    std::vector<double> distances;     // d_k = ||f_{k+1} - f_k|| in L2 over time and phase space, d_0 against f_0
};

class IterationDivergence : public std::runtime_error {
public:
    IterationDivergence(const std::string& what, std::vector<double> d) : std::runtime_error(what), distances(std::move(d)) {}
    std::vector<double> distances;
};

class SpdeEngine {
public:
    SpdeEngine(const GridSpec& g, const SchemeConfig& cfg, const NoiseBasis& basis = {}, const DriftSpec& drift = {},
               double mass_hint = 1.0);

    const GridSpec& grid() const { return grid_; }
    const SchemeConfig& config() const { return cfg_; }
    const CoefficientFamily& coefficients() const { return fam_; }
    const CovarianceFields& covariance() const { return cov_; }
    const NoiseBasis& basis() const { return basis_; }
    const NoisePath& path() const { return path_; }
    double dt() const { return dt_; }
    long long steps() const { return steps_; }
    double cfl_bound() const { return cfl_bound_; }

    // Drift field b acting on f: V * rho(f), the frozen field, or zero.
    VectorSpatialField drift_field(const PhaseField& f) const;

    // Ito drift including the correction terms, in divergence form.
    PhaseField drift_term(const PhaseField& f, const VectorSpatialField& b) const;
    // Same operator without the Ito corrections (Stratonovich drift).
    PhaseField stratonovich_drift(const PhaseField& f, const VectorSpatialField& b) const;

    NoiseSample noise(long long step) const;
    // -eps div_v(sigma(f) dW).
    PhaseField noise_term(const PhaseField& f, const NoiseSample& s) const;

    PhaseField step_ito(const PhaseField& f, long long step, StepStats* stats = nullptr) const;
    PhaseField step_stratonovich(const PhaseField& f, long long step, StepStats* stats = nullptr) const;

    Trajectory run(const PhaseField& f0, const RunOptions& opt = {}) const;
    Trajectory run_stratonovich(const PhaseField& f0, const RunOptions& opt = {}) const;

    // One linear solve with coefficients frozen along `frozen` (one field per step, index 0..steps-1).
    Trajectory linear_solve(const PhaseField& f0, const std::vector<PhaseField>& frozen, const RunOptions& opt = {}) const;
    LinearIterationResult run_linear_iteration(const PhaseField& f0, int iterations, double divergence_ratio = 10.0) const;

private:
    PhaseField flux_divergence(const PhaseField& f, const VectorSpatialField& b, const PhaseField* frozen,
                               bool ito_corrections) const;
    void add_transport(const PhaseField& f, PhaseField& out) const;
    PhaseField rk3(const PhaseField& f, const VectorSpatialField* fixed_b, const PhaseField* frozen, bool ito) const;
    PhaseField finish_step(PhaseField next, long long step, StepStats* stats) const;

    GridSpec grid_;
    SchemeConfig cfg_;
    CoefficientFamily fam_;
    NoiseBasis basis_;
    EvaluatedBasis eb_;
    CovarianceFields cov_;
    DriftSpec drift_;
    NoisePath path_;
    double dt_ = 0.0;
    long long steps_ = 0;
    double cfl_bound_ = 0.0;
};

// Full trajectory of the nonlinear equation with drift recomputed from the current state.
Trajectory run_nonlinear(const PhaseField& f0, const SchemeConfig& cfg, const NoiseBasis& basis, const DriftSpec& drift,
                         const RunOptions& opt = {});

// Noise-free limit; cfg.eps must be 0.
Trajectory deterministic_vfp(const PhaseField& f0, const SchemeConfig& cfg, const DriftSpec& drift,
                             const RunOptions& opt = {});

struct TruncatedFields {
    PhaseField g1;
    PhaseField g2;
    VectorPhaseField h1;
    PhaseField h2;
};

TruncatedFields truncated_fields(const PhaseField& f, const TruncationKit& kit, const CoefficientFamily& fam,
                                 const CovarianceFields& cov);

// Ensemble of independent noise realizations; member m uses seed member_seed(seed, m).
std::uint64_t member_seed(std::uint64_t seed, int member);
std::vector<Trajectory> run_ensemble(const PhaseField& f0, const GridSpec& g, const SchemeConfig& cfg,
                                     const NoiseBasis& basis, const DriftSpec& drift, int members,
                                     const RunOptions& opt = {}, int threads = 0);

// Worker count from KFHD_THREADS, capped by the hardware count; at least 1.
int worker_threads();

}  // namespace kfhd
