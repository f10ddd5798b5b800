#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace kfhd {

struct GridSpec {
    double L_x = 0.0;
    double L_v = 0.0;
    int n_x = 0;
    int n_v = 0;
    int d = 1;

    double h_x() const { return 2.0 * L_x / n_x; }
    double h_v() const { return 2.0 * L_v / n_v; }
    std::size_t spatial_size() const;
    std::size_t velocity_size() const;
    std::size_t size() const { return spatial_size() * velocity_size(); }
    double dx() const;  // h_x^d
    double dv() const;  // h_v^d
    double dz() const { return dx() * dv(); }

    // Node coordinates, -L + i*h.
    double x_at(int i) const { return -L_x + i * h_x(); }
    double v_at(int i) const { return -L_v + i * h_v(); }

    // Per-axis decomposition of a flat index. Axes 0..d-1 are x, d..2d-1 are v.
    int axis_count() const { return 2 * d; }
    int axis_size(int axis) const { return axis < d ? n_x : n_v; }
    std::size_t axis_stride(int axis) const;
    double axis_spacing(int axis) const { return axis < d ? h_x() : h_v(); }
    double axis_origin(int axis) const { return axis < d ? -L_x : -L_v; }
    int coord(std::size_t flat, int axis) const {
        return static_cast<int>((flat / axis_stride(axis)) % static_cast<std::size_t>(axis_size(axis)));
    }
    double coordinate(std::size_t flat, int axis) const {
        return axis_origin(axis) + coord(flat, axis) * axis_spacing(axis);
    }
    std::size_t spatial_index(std::size_t flat) const { return flat / velocity_size(); }
    std::size_t velocity_index(std::size_t flat) const { return flat % velocity_size(); }

    bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double L_x, double L_v, int n_x, int n_v, int d);

struct PhaseField {
    GridSpec grid;
    std::vector<double> values;

    PhaseField() = default;
    explicit PhaseField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

struct SpatialField {
    GridSpec grid;
    std::vector<double> values;

    SpatialField() = default;
    explicit SpatialField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.spatial_size(), fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

using VectorPhaseField = std::vector<PhaseField>;
using VectorSpatialField = std::vector<SpatialField>;

// Samples fn(x, v) at every node; x and v point at d coordinates each.
template <class Fn>
PhaseField sample_field(const GridSpec& g, Fn&& fn) {
    PhaseField f(g);
    std::array<double, 2> x{}, v{};
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int a = 0; a < g.d; ++a) {
            x[a] = g.coordinate(i, a);
            v[a] = g.coordinate(i, g.d + a);
        }
        f.values[i] = fn(x.data(), v.data());
    }
    return f;
}

template <class Fn>
SpatialField sample_spatial(const GridSpec& g, Fn&& fn) {
    SpatialField s(g);
    const std::size_t nv = g.velocity_size();
    std::array<double, 2> x{};
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
        for (int a = 0; a < g.d; ++a) x[a] = g.coordinate(i * nv, a);
        s.values[i] = fn(x.data());
    }
    return s;
}

void require_finite(const PhaseField& f, const char* what);
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

SpatialField marginal_density(const PhaseField& f);

// Centered second-order difference along one axis, periodic wrap.
PhaseField centered_diff(const PhaseField& f, int axis);
VectorPhaseField grad_v(const PhaseField& f);
VectorPhaseField grad_x(const PhaseField& f);
PhaseField div_v(const VectorPhaseField& F);

// Periodic convolution over x of each component of V with rho, via FFT.
VectorSpatialField convolve_x(const VectorSpatialField& V, const SpatialField& rho);

double lp_norm(const PhaseField& f, double p);
double lp_distance(const PhaseField& f, const PhaseField& g, double p);
double integrate(const PhaseField& f);
double inner(const PhaseField& f, const PhaseField& g);

// Snapshot I/O: "KFHD1 d n_x n_v L_x L_v t\n" then little-endian doubles.
void write_snapshot(const std::string& path, const PhaseField& f, double t);
PhaseField read_snapshot(const std::string& path, double* t_out = nullptr);

}  // namespace kfhd
