#include <doctest.h>

#include "kfhd/phase_grid.hpp"
#include "test_support.hpp"

#include <cstdio>
#include <filesystem>

using namespace kfhd;
using kfhd::testing::kPi;

TEST_CASE("make_grid spacings and validation") {
    const GridSpec g = make_grid(kPi, kPi, 64, 64, 1);
    CHECK(g.h_x() == doctest::Approx(2 * kPi / 64).epsilon(1e-15));
    CHECK(g.h_v() == doctest::Approx(2 * kPi / 64).epsilon(1e-15));
    CHECK(make_grid(kPi, 4, 128, 64, 1).h_v() == 0.125);
    CHECK_THROWS_AS(make_grid(1, 1, 7, 64, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 1, 6, 64, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0.0, 1, 8, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, -1, 8, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 1, 8, 8, 3), std::invalid_argument);
}

TEST_CASE("layout is row-major x axes then v axes") {
    const GridSpec g = make_grid(1, 2, 8, 10, 2);
    CHECK(g.size() == 8u * 8u * 10u * 10u);
    const std::size_t flat = ((3 * 8 + 5) * 10 + 7) * 10 + 2;
    CHECK(g.coord(flat, 0) == 3);
    CHECK(g.coord(flat, 1) == 5);
    CHECK(g.coord(flat, 2) == 7);
    CHECK(g.coord(flat, 3) == 2);
    CHECK(g.coordinate(flat, 2) == doctest::Approx(-2 + 7 * 0.4));
    // v = 0 sits at node n_v/2.
    CHECK(g.v_at(g.n_v / 2) == 0.0);
}

TEST_CASE("marginal density") {
    const GridSpec g = make_grid(1.5, 2.0, 16, 32, 1);
    SUBCASE("constant field") {
        const PhaseField f(g, 0.7);
        const SpatialField rho = marginal_density(f);
        for (double r : rho.values) CHECK(r == doctest::Approx(0.7 * 4.0).epsilon(1e-14));
    }
    SUBCASE("separable with unit velocity factor") {
        std::vector<double> u(g.n_v);
        double su = 0;
        for (int k = 0; k < g.n_v; ++k) su += (u[k] = 1.0 + 0.5 * std::sin(k));
        for (auto& x : u) x /= su * g.h_v();
        const PhaseField f = sample_field(g, [&](const double* x, const double* v) {
            const int k = static_cast<int>(std::lround((v[0] + g.L_v) / g.h_v()));
            return std::cos(x[0]) * u[k];
        });
        const SpatialField rho = marginal_density(f);
        for (int i = 0; i < g.n_x; ++i) CHECK(rho.values[i] == doctest::Approx(std::cos(g.x_at(i))).epsilon(1e-13));
    }
    SUBCASE("gaussian bump against independent quadrature") {
        const PhaseField f = sample_field(g, [](const double* x, const double* v) {
            return (2 + std::sin(x[0])) * std::exp(-v[0] * v[0] * 2);
        });
        const SpatialField rho = marginal_density(f);
        for (int i = 0; i < g.n_x; ++i) {
            long double s = 0;
            for (int k = 0; k < g.n_v; ++k) {
                const double v = -2.0 + k * (4.0 / 32);
                s += (2 + std::sin(g.x_at(i))) * std::exp(-v * v * 2);
            }
            CHECK(rho.values[i] == doctest::Approx(static_cast<double>(s * 0.125)).epsilon(1e-14));
        }
    }
    SUBCASE("total mass identity and shift equivariance") {
        std::mt19937_64 rng(3);
        const PhaseField f = kfhd::testing::random_field(g, rng);
        const SpatialField rho = marginal_density(f);
        double sr = 0;
        for (double r : rho.values) sr += r * g.dx();
        CHECK(sr == doctest::Approx(integrate(f)).epsilon(1e-13));
        PhaseField shifted(g);
        const std::size_t nv = g.velocity_size();
        for (std::size_t i = 0; i < g.spatial_size(); ++i)
            for (std::size_t k = 0; k < nv; ++k)
                shifted.values[((i + 3) % g.spatial_size()) * nv + k] = f.values[i * nv + k];
        const SpatialField rs = marginal_density(shifted);
        for (std::size_t i = 0; i < g.spatial_size(); ++i)
            CHECK(rs.values[(i + 3) % g.spatial_size()] == rho.values[i]);
    }
}

TEST_CASE("centered stencils") {
    const GridSpec g = make_grid(kPi, kPi, 16, 64, 1);
    SUBCASE("constants have zero gradient") {
        const PhaseField f(g, 3.25);
        for (const auto& c : grad_v(f))
            for (double x : c.values) CHECK(x == 0.0);
        for (const auto& c : grad_x(f))
            for (double x : c.values) CHECK(x == 0.0);
    }
    SUBCASE("sin(v) derivative within the Taylor remainder") {
        for (int n : {32, 64, 128}) {
            const GridSpec gn = make_grid(kPi, kPi, 8, n, 1);
            const PhaseField f = sample_field(gn, [](const double*, const double* v) { return std::sin(v[0]); });
            const PhaseField d = grad_v(f)[0];
            const double h = gn.h_v();
            double err = 0;
            for (std::size_t i = 0; i < d.size(); ++i)
                err = std::max(err, std::abs(d.values[i] - std::cos(gn.coordinate(i, 1))));
            // |f'''| <= 1, so the remainder is at most h^2/6.
            CHECK(err <= h * h / 6.0 + 1e-14);
        }
    }
    SUBCASE("single Fourier mode matches the discrete symbol sin(kh)/h") {
        const int k = 5;
        const PhaseField f = sample_field(g, [&](const double* x, const double*) { return std::sin(k * x[0]); });
        const PhaseField d = grad_x(f)[0];
        const double sym = std::sin(k * g.h_x()) / g.h_x();
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(d.values[i] == doctest::Approx(sym * std::cos(k * g.coordinate(i, 0))).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("property: div_v is minus the adjoint of grad_v and sums to zero") {
    std::mt19937_64 rng(11);
    for (int d : {1, 2}) {
        const GridSpec g = make_grid(1.0, 2.0, 8, 10, d);
        for (int trial = 0; trial < 20; ++trial) {
            VectorPhaseField F;
            for (int c = 0; c < d; ++c) F.push_back(kfhd::testing::random_field(g, rng));
            const PhaseField gf = kfhd::testing::random_field(g, rng);
            const auto gg = grad_v(gf);
            double lhs = inner(div_v(F), gf);
            for (int c = 0; c < d; ++c) lhs += inner(F[c], gg[c]);
            CHECK(std::abs(lhs) <= 1e-12);
            const PhaseField lap = div_v(grad_v(gf));
            CHECK(std::abs(integrate(lap)) <= 1e-11);
        }
    }
}

TEST_CASE("convolve_x") {
    const GridSpec g = make_grid(2.0, 1.0, 32, 8, 1);
    std::mt19937_64 rng(5);
    SUBCASE("zero kernel") {
        const auto out = convolve_x({SpatialField(g)}, kfhd::testing::random_spatial(g, rng));
        for (double x : out[0].values) CHECK(x == 0.0);
    }
    SUBCASE("constant kernel") {
        const SpatialField rho = kfhd::testing::random_spatial(g, rng);
        double mass = 0;
        for (double r : rho.values) mass += r * g.dx();
        const auto out = convolve_x({SpatialField(g, 1.5)}, rho);
        for (double x : out[0].values) CHECK(x == doctest::Approx(1.5 * mass).epsilon(1e-12).scale(1.0));
    }
    SUBCASE("direct double loop oracle") {
        const SpatialField V = kfhd::testing::random_spatial(g, rng);
        const SpatialField rho = kfhd::testing::random_spatial(g, rng);
        const auto out = convolve_x({V}, rho);
        const int n = g.n_x;
        double scale = 0;
        for (int m = 0; m < n; ++m) {
            double s = 0;
            for (int j = 0; j < n; ++j) {
                // V at displacement (m - j) h, i.e. node index m - j + n/2.
                const int k = ((m - j + n / 2) % n + n) % n;
                s += V.values[k] * rho.values[j] * g.h_x();
            }
            scale = std::max(scale, std::abs(s));
            CHECK(out[0].values[m] == doctest::Approx(s).epsilon(1e-12).scale(1.0));
        }
        CHECK(scale > 0);
    }
    SUBCASE("bound and translation invariance") {
        const SpatialField V = kfhd::testing::random_spatial(g, rng);
        const SpatialField rho = kfhd::testing::random_spatial(g, rng);
        const auto out = convolve_x({V}, rho);
        double vmax = 0, rl1 = 0, omax = 0;
        for (double x : V.values) vmax = std::max(vmax, std::abs(x));
        for (double x : rho.values) rl1 += std::abs(x) * g.dx();
        for (double x : out[0].values) omax = std::max(omax, std::abs(x));
        CHECK(omax <= vmax * rl1 * (1 + 1e-12));
        SpatialField rs(g);
        for (int i = 0; i < g.n_x; ++i) rs.values[(i + 5) % g.n_x] = rho.values[i];
        const auto o2 = convolve_x({V}, rs);
        for (int i = 0; i < g.n_x; ++i)
            CHECK(o2[0].values[(i + 5) % g.n_x] == doctest::Approx(out[0].values[i]).epsilon(1e-12).scale(1.0));
    }
    SUBCASE("grid mismatch") {
        const GridSpec g2 = make_grid(2.0, 1.0, 16, 8, 1);
        CHECK_THROWS_AS(convolve_x({SpatialField(g2)}, SpatialField(g)), std::invalid_argument);
    }
}

TEST_CASE("lp norms") {
    const GridSpec g = make_grid(1.0, 3.0, 8, 12, 1);
    const PhaseField z(g);
    for (double p : {1.0, 2.0, 3.5, double(INFINITY)}) CHECK(lp_norm(z, p) == 0.0);
    CHECK(lp_norm(PhaseField(g, 0.5), 1.0) == doctest::Approx(0.5 * 2.0 * 6.0).epsilon(1e-14));
    CHECK_THROWS_AS(lp_norm(z, 0.5), std::invalid_argument);
    std::mt19937_64 rng(2);
    const PhaseField f = kfhd::testing::random_field(g, rng);
    long double s = 0, s3 = 0;
    double mx = 0;
    for (double x : f.values) {
        s += static_cast<long double>(x) * x;
        s3 += std::pow(std::abs(static_cast<long double>(x)), 3.0L);
        mx = std::max(mx, std::abs(x));
    }
    CHECK(lp_norm(f, 2.0) == doctest::Approx(std::sqrt(static_cast<double>(s) * g.dz())).epsilon(1e-13));
    CHECK(lp_norm(f, 3.0) == doctest::Approx(std::cbrt(static_cast<double>(s3) * g.dz())).epsilon(1e-13));
    CHECK(lp_norm(f, INFINITY) == mx);
    CHECK(lp_distance(f, f, 1.0) == 0.0);
}

TEST_CASE("snapshot round trip is bit exact") {
    const GridSpec g = make_grid(kPi, 5.5, 8, 16, 1);
    std::mt19937_64 rng(9);
    const PhaseField f = kfhd::testing::random_field(g, rng);
    const auto path = std::filesystem::temp_directory_path() / "kfhd_snapshot_test.bin";
    write_snapshot(path.string(), f, 0.375);
    double t = 0;
    const PhaseField r = read_snapshot(path.string(), &t);
    CHECK(t == 0.375);
    CHECK(r.grid == g);
    CHECK(r.values == f.values);
    std::filesystem::remove(path);
}
