#include <doctest.h>

#include "kfhd/noise_model.hpp"
#include "test_support.hpp"

#include <cmath>
#include <stdexcept>

using namespace kfhd;
using kfhd::testing::kPi;

TEST_CASE("philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::apply(C{0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::apply(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("gaussian draws have unit variance and zero mean") {
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto z = gaussian_pair(77, static_cast<std::uint64_t>(i), 3, 0);
        s += z[0] + z[1];
        s2 += z[0] * z[0] + z[1] * z[1];
    }
    const double mean = s / (2 * n), var = s2 / (2 * n) - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(2.0 * n));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / (2.0 * n)));
}

TEST_CASE("covariance fields of simple bases") {
    const GridSpec g = make_grid(kPi, kPi, 16, 16, 1);
    SUBCASE("empty basis") {
        const auto cov = covariance_fields(NoiseBasis{}, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(cov.F1.values[i] == 0.0);
            CHECK(cov.F2[0].values[i] == 0.0);
            CHECK(cov.F3.values[i] == 0.0);
            CHECK(cov.F4.values[i] == 0.0);
        }
    }
    SUBCASE("unit pair with k_v = 1 on L_v = pi") {
        NoiseBasis b{{{1.0, {0, 0}, {1, 0}, ModeKind::pair}}};
        const auto cov = covariance_fields(b, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(cov.F1.values[i] == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(cov.F2[0].values[i] == 0.0);
            CHECK(cov.F3.values[i] == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(cov.F4.values[i] == doctest::Approx(-1.0).epsilon(1e-15));
        }
    }
    SUBCASE("pair independent of v") {
        NoiseBasis b{{{0.5, {2, 0}, {0, 0}, ModeKind::pair}}};
        const auto cov = covariance_fields(b, g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(cov.F1.values[i] == doctest::Approx(0.25).epsilon(1e-15));
            CHECK(cov.F2[0].values[i] == 0.0);
            CHECK(cov.F3.values[i] == 0.0);
            CHECK(cov.F4.values[i] == 0.0);
        }
    }
    SUBCASE("aliasing is rejected") {
        NoiseBasis b{{{1.0, {8, 0}, {1, 0}, ModeKind::pair}}};
        CHECK_THROWS_AS(covariance_fields(b, g), std::invalid_argument);
        NoiseBasis neg{{{-1.0, {1, 0}, {1, 0}, ModeKind::pair}}};
        CHECK_THROWS_AS(covariance_fields(neg, g), std::invalid_argument);
    }
}

TEST_CASE("property: trig pairs satisfy the compatibility identities exactly") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> kd(-5, 5);
    std::uniform_real_distribution<double> ad(0.01, 2.0);
    for (int d : {1, 2}) {
        const GridSpec g = make_grid(2.0, 3.0, 16, 16, d);
        for (int trial = 0; trial < 15; ++trial) {
            NoiseBasis b;
            const int nm = 1 + trial % 5;
            for (int m = 0; m < nm; ++m) {
                NoiseMode mode;
                mode.a = ad(rng);
                for (int c = 0; c < d; ++c) {
                    mode.kx[c] = kd(rng);
                    mode.kv[c] = kd(rng);
                }
                b.modes.push_back(mode);
            }
            const auto cov = covariance_fields(b, g);
            for (const auto& comp : cov.F2)
                for (double x : comp.values) CHECK(x == 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(cov.F3.values[i] + cov.F4.values[i] == 0.0);
            const auto rep = check_compatibility(cov);
            CHECK(rep.ok());
            // F1 and F3 are constant sums of a^2 and a^2 |kappa_v|^2.
            double f1 = 0, f3 = 0;
            for (const auto& m : b.modes) {
                double kv2 = 0;
                for (int c = 0; c < d; ++c) kv2 += std::pow(kPi * m.kv[c] / g.L_v, 2);
                f1 += m.a * m.a;
                f3 += m.a * m.a * kv2;
            }
            for (std::size_t i = 0; i < g.size(); i += 7) {
                CHECK(cov.F1.values[i] == doctest::Approx(f1).epsilon(1e-13));
                CHECK(cov.F3.values[i] == doctest::Approx(f3).epsilon(1e-13).scale(1e-300));
            }
        }
    }
}

TEST_CASE("unpaired sin mode is flagged with the expected residual") {
    const GridSpec g = make_grid(kPi, kPi, 32, 32, 1);
    const double a = 0.7;
    NoiseBasis b{{{a, {1, 0}, {2, 0}, ModeKind::sin_only}}};
    const auto cov = covariance_fields(b, g);
    double expected = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double ph = g.coordinate(i, 0) + 2 * g.coordinate(i, 1);
        expected = std::max(expected, a * a * 4.0 * std::abs(std::cos(2 * ph)));
    }
    const auto rep = check_compatibility(cov);
    CHECK(rep.max_F3_plus_F4 == doctest::Approx(expected).epsilon(1e-12));
    CHECK_FALSE(rep.ok());
    CHECK(check_compatibility(covariance_fields(NoiseBasis{}, g)).max_F3_plus_F4 == 0.0);
}

TEST_CASE("sample_step") {
    const GridSpec g = make_grid(kPi, kPi, 16, 16, 1);
    NoiseBasis b{{{0.3, {1, 0}, {1, 0}, ModeKind::pair}, {0.2, {0, 0}, {2, 0}, ModeKind::pair}}};
    NoisePath path{42, 0.01, 100000, 1, 1};
    SUBCASE("determinism") {
        const auto a1 = sample_step(b, path, 17, g);
        const auto a2 = sample_step(b, path, 17, g);
        CHECK(a1.dW[0].values == a2.dW[0].values);
        CHECK(a1.div_v_dW.values == a2.div_v_dW.values);
        const auto a3 = sample_step(b, NoisePath{43, 0.01, 100000, 1, 1}, 17, g);
        CHECK(a1.dW[0].values != a3.dW[0].values);
    }
    SUBCASE("analytic divergence agrees with a fine-grid derivative") {
        const GridSpec gf = make_grid(kPi, kPi, 16, 512, 1);
        const auto s = sample_step(b, path, 3, gf);
        const PhaseField fd = div_v(s.dW);
        double err = 0, scale = 0;
        for (std::size_t i = 0; i < gf.size(); ++i) {
            err = std::max(err, std::abs(fd.values[i] - s.div_v_dW.values[i]));
            scale = std::max(scale, std::abs(s.div_v_dW.values[i]));
        }
        CHECK(err <= 1e-3 * scale);
    }
    SUBCASE("zero amplitude outputs vanish and exhaustion throws") {
        NoiseBasis empty;
        const auto s = sample_step(empty, path, 0, g);
        for (double x : s.dW[0].values) CHECK(x == 0.0);
        CHECK_THROWS_AS(sample_step(b, path, 100000, g), std::out_of_range);
    }
    SUBCASE("Monte-Carlo variance equals F1 dt") {
        const auto eb = evaluate_basis(b, g);
        const auto cov = covariance_fields(b, g);
        const std::size_t node = 37;
        const int n = 100000;
        double s2 = 0, s4 = 0;
        for (int k = 0; k < n; ++k) {
            const auto inc = path.increments(k, eb.count());
            double w = 0;
            for (int f = 0; f < eb.count(); ++f) w += eb.values[f].values[node] * inc[f];
            s2 += w * w;
            s4 += w * w * w * w;
        }
        const double m2 = s2 / n, se = std::sqrt((s4 / n - m2 * m2) / n);
        CHECK(std::abs(m2 - cov.F1.values[node] * path.dt) <= 3 * se);
    }
    SUBCASE("stride sums fine increments") {
        NoisePath coarse{9, 0.02, 10, 2, 1};
        NoisePath fine{9, 0.01, 20, 1, 1};
        const auto c = coarse.increments(4, 3);
        const auto f0 = fine.increments(8, 3);
        const auto f1 = fine.increments(9, 3);
        for (int k = 0; k < 3; ++k) CHECK(c[k] == doctest::Approx(f0[k] + f1[k]).epsilon(1e-14));
    }
}
