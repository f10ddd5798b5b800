#pragma once

#include "kfhd/phase_grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace kfhd {

// Philox4x32-10 counter-based generator.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter apply(Counter ctr, Key key);
};

// Two independent standard normals from one Philox block keyed by seed, addressed by counter.
std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b, std::uint32_t c);

enum class ModeKind { pair, sin_only, cos_only };

struct NoiseMode {
    double a = 0.0;
    std::array<int, 2> kx{0, 0};
    std::array<int, 2> kv{0, 0};
    ModeKind kind = ModeKind::pair;
};

struct NoiseBasis {
    std::vector<NoiseMode> modes;

    // Each pair expands to two basis functions (sin then cos).
    int function_count() const;
    void validate(const GridSpec& g) const;
    std::string digest() const;
};

struct CovarianceFields {
    PhaseField F1;
    VectorPhaseField F2;
    PhaseField F3;
    PhaseField F4;
};

CovarianceFields covariance_fields(const NoiseBasis& basis, const GridSpec& g);

struct CompatibilityReport {
    double max_div_F2 = 0.0;
    double max_F3_plus_F4 = 0.0;
    double F3_sup = 0.0;
    bool ok(double rel_tol = 1e-12) const;
};

CompatibilityReport check_compatibility(const CovarianceFields& cov);

// Basis functions and their analytic velocity gradients, sampled on a grid.
struct EvaluatedBasis {
    GridSpec grid;
    std::vector<PhaseField> values;
    std::vector<VectorPhaseField> grad_v;
    int count() const { return static_cast<int>(values.size()); }
};

EvaluatedBasis evaluate_basis(const NoiseBasis& basis, const GridSpec& g);

// Brownian coefficients as a pure function of (seed, step, function, component).
// Each coarse step sums `stride` fine increments so refined paths stay consistent.
struct NoisePath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    long long horizon = 0;
    int stride = 1;
    int d = 1;

    // Increments for all basis functions at one step, layout [function][component].
    std::vector<double> increments(long long step, int n_functions) const;
};

struct NoiseSample {
    VectorPhaseField dW;
    PhaseField div_v_dW;
};

NoiseSample assemble_noise(const EvaluatedBasis& eb, const std::vector<double>& increments);
NoiseSample sample_step(const NoiseBasis& basis, const NoisePath& path, long long step_index, const GridSpec& g);

}  // namespace kfhd
