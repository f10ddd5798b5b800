#include "kfhd/phase_grid.hpp"

#include "kfhd/fft.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kfhd {

std::size_t GridSpec::spatial_size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n_x);
    return s;
}

std::size_t GridSpec::velocity_size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n_v);
    return s;
}

double GridSpec::dx() const { return std::pow(h_x(), d); }
double GridSpec::dv() const { return std::pow(h_v(), d); }

std::size_t GridSpec::axis_stride(int axis) const {
    std::size_t s = 1;
    for (int b = axis_count() - 1; b > axis; --b) s *= static_cast<std::size_t>(axis_size(b));
    return s;
}

GridSpec make_grid(double L_x, double L_v, int n_x, int n_v, int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("grid: d must be 1 or 2");
    if (n_x < 8 || n_x % 2 != 0) throw std::invalid_argument("grid: n_x must be even and >= 8");
    if (n_v < 8 || n_v % 2 != 0) throw std::invalid_argument("grid: n_v must be even and >= 8");
    if (!(L_x > 0.0) || !(L_v > 0.0) || !std::isfinite(L_x) || !std::isfinite(L_v))
        throw std::invalid_argument("grid: box half-widths must be positive");
    return GridSpec{L_x, L_v, n_x, n_v, d};
}

void require_finite(const PhaseField& f, const char* what) {
    for (double x : f.values)
        if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": non-finite value");
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

SpatialField marginal_density(const PhaseField& f) {
    const GridSpec& g = f.grid;
    SpatialField rho(g);
    const std::size_t nv = g.velocity_size();
    const double dv = g.dv();
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
        double s = 0.0;
        const double* row = f.values.data() + i * nv;
        for (std::size_t j = 0; j < nv; ++j) s += row[j];
        rho.values[i] = s * dv;
    }
    return rho;
}

PhaseField centered_diff(const PhaseField& f, int axis) {
    const GridSpec& g = f.grid;
    const std::size_t stride = g.axis_stride(axis);
    const std::size_t n = static_cast<std::size_t>(g.axis_size(axis));
    const std::size_t block = stride * n;
    const double inv2h = 0.5 / g.axis_spacing(axis);
    PhaseField out(g);
    for (std::size_t base = 0; base < g.size(); base += block) {
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t cp = (c + 1 == n) ? 0 : c + 1;
            const std::size_t cm = (c == 0) ? n - 1 : c - 1;
            const double* fp = f.values.data() + base + cp * stride;
            const double* fm = f.values.data() + base + cm * stride;
            double* o = out.values.data() + base + c * stride;
            for (std::size_t k = 0; k < stride; ++k) o[k] = (fp[k] - fm[k]) * inv2h;
        }
    }
    return out;
}

VectorPhaseField grad_v(const PhaseField& f) {
    VectorPhaseField out;
    for (int a = 0; a < f.grid.d; ++a) out.push_back(centered_diff(f, f.grid.d + a));
    return out;
}

VectorPhaseField grad_x(const PhaseField& f) {
    VectorPhaseField out;
    for (int a = 0; a < f.grid.d; ++a) out.push_back(centered_diff(f, a));
    return out;
}

PhaseField div_v(const VectorPhaseField& F) {
    if (F.empty()) throw std::invalid_argument("div_v: empty vector field");
    const GridSpec& g = F[0].grid;
    if (static_cast<int>(F.size()) != g.d) throw std::invalid_argument("div_v: component count must equal d");
    PhaseField out(g);
    for (int a = 0; a < g.d; ++a) {
        require_same_grid(g, F[a].grid, "div_v");
        PhaseField c = centered_diff(F[a], g.d + a);
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += c.values[i];
    }
    return out;
}

VectorSpatialField convolve_x(const VectorSpatialField& V, const SpatialField& rho) {
    const GridSpec& g = rho.grid;
    std::vector<int> dims(g.d, g.n_x);
    const std::size_t n = g.spatial_size();
    std::vector<cplx> rh(n);
    for (std::size_t i = 0; i < n; ++i) rh[i] = rho.values[i];
    fft_forward(rh, dims);
    VectorSpatialField out;
    // Both inputs are indexed from -L. Output node m needs kernel index m - j + n_x/2, so the
    // cyclic product is read with a half-period roll along each axis.
    for (const auto& comp : V) {
        require_same_grid(g, comp.grid, "convolve_x");
        std::vector<cplx> vh(n);
        for (std::size_t i = 0; i < n; ++i) vh[i] = comp.values[i];
        fft_forward(vh, dims);
        for (std::size_t i = 0; i < n; ++i) vh[i] *= rh[i];
        fft_inverse(vh, dims);
        SpatialField res(g);
        const int half = g.n_x / 2;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t src = 0;
            std::size_t rem = i;
            std::size_t mul = 1;
            for (int a = g.d - 1; a >= 0; --a) {
                const int c = static_cast<int>(rem % g.n_x);
                rem /= g.n_x;
                const int sc = (c + half) % g.n_x;
                src += static_cast<std::size_t>(sc) * mul;
                mul *= static_cast<std::size_t>(g.n_x);
            }
            res.values[i] = vh[src].real() * g.dx();
        }
        out.push_back(std::move(res));
    }
    return out;
}

double lp_norm(const PhaseField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : f.values) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    if (p == 1.0) {
        for (double x : f.values) s += std::abs(x);
        return s * f.grid.dz();
    }
    if (p == 2.0) {
        for (double x : f.values) s += x * x;
        return std::sqrt(s * f.grid.dz());
    }
    for (double x : f.values) s += std::pow(std::abs(x), p);
    return std::pow(s * f.grid.dz(), 1.0 / p);
}

double lp_distance(const PhaseField& f, const PhaseField& g, double p) {
    require_same_grid(f.grid, g.grid, "lp_distance");
    PhaseField diff(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) diff.values[i] = f.values[i] - g.values[i];
    return lp_norm(diff, p);
}

double integrate(const PhaseField& f) {
    double s = 0.0;
    for (double x : f.values) s += x;
    return s * f.grid.dz();
}

double inner(const PhaseField& f, const PhaseField& g) {
    require_same_grid(f.grid, g.grid, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.values[i] * g.values[i];
    return s * f.grid.dz();
}

namespace {

void put_le(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_le(std::istream& is) {
    std::uint64_t bits = 0;
    is.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!is) throw std::runtime_error("snapshot: truncated payload");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
}

}  // namespace

void write_snapshot(const std::string& path, const PhaseField& f, double t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    const GridSpec& g = f.grid;
    char header[256];
    std::snprintf(header, sizeof header, "KFHD1 %d %d %d %.17g %.17g %.17g\n", g.d, g.n_x, g.n_v, g.L_x, g.L_v, t);
    os << header;
    for (double x : f.values) put_le(os, x);
    if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

PhaseField read_snapshot(const std::string& path, double* t_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    std::string line;
    std::getline(is, line);
    std::istringstream hs(line);
    std::string magic;
    int d = 0, nx = 0, nv = 0;
    double Lx = 0, Lv = 0, t = 0;
    hs >> magic >> d >> nx >> nv >> Lx >> Lv >> t;
    if (magic != "KFHD1" || !hs) throw std::runtime_error("snapshot: bad header in " + path);
    PhaseField f(make_grid(Lx, Lv, nx, nv, d));
    for (auto& x : f.values) x = get_le(is);
    if (t_out) *t_out = t;
    return f;
}

}  // namespace kfhd
