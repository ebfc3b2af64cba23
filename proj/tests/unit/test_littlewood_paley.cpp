#include <doctest.h>

#include "fft.hpp"
#include "littlewood_paley.hpp"
#include "test_helpers.hpp"

using namespace homlab;
using testutil::two_pi;

namespace {

ScalarField mode(const TorusGrid& g, int k1, int k2) {
    return testutil::sample(g, [&](double x, double y) { return std::cos(two_pi * (k1 * x + k2 * y)); });
}

}  // namespace

TEST_CASE("partition axioms on the discrete mode set") {
    for (int n : {16, 32, 64, 128}) {
        const TorusGrid g = make_grid(n);
        const DyadicPartition& p = dyadic_partition(g);
        CHECK(p.max_block() == static_cast<int>(std::log2(n)) - 1);
        for (int k1 = -n / 2; k1 < n / 2; ++k1)
            for (int k2 = 0; k2 <= n / 2; ++k2) {
                double sum = 0.0;
                for (int j = -1; j <= p.max_block(); ++j) {
                    const double w = p.weight(j, k1, k2);
                    CHECK(w >= -1e-15);
                    sum += w;
                    for (int i = j + 2; i <= p.max_block(); ++i) CHECK(w * p.weight(i, k1, k2) == 0.0);
                }
                CHECK(std::abs(sum - 1.0) < 1e-14);
                if (p.weight(-1, k1, k2) > 0.0) {
                    CHECK(k1 * k1 + k2 * k2 <= 1);
                    for (int j = 1; j <= p.max_block(); ++j) CHECK(p.weight(j, k1, k2) == 0.0);
                }
            }
    }
}

TEST_CASE("lp_block") {
    const TorusGrid g = make_grid(64);
    const DyadicPartition& p = dyadic_partition(g);
    REQUIRE(p.weight(2, 6, 0) == 1.0);
    const ScalarField f = mode(g, 6, 0);
    for (int j = -1; j <= p.max_block(); ++j) {
        const ScalarField b = lp_block(f, j);
        CHECK(testutil::max_abs_diff(b, j == 2 ? f : ScalarField(g)) < 1e-13);
    }
    const ScalarField c(g, 2.5);
    CHECK(testutil::max_abs_diff(lp_block(c, -1), c) < 1e-14);
    CHECK(sup_norm(lp_block(c, 0)) < 1e-14);

    const ScalarField r = testutil::random_field(g, 1);
    ScalarField sum(g);
    for (const auto& b : lp_blocks(r)) sum = sum + b;
    CHECK(testutil::max_abs_diff(sum, r) < 1e-12);
    CHECK_THROWS(lp_block(r, p.max_block() + 1));
    CHECK_THROWS(lp_block(r, -2));
}

TEST_CASE("Bony decomposition") {
    for (int n : {16, 32, 64}) {
        const TorusGrid g = make_grid(n);
        const ScalarField f = testutil::random_field(g, 3 * n);
        const ScalarField h = testutil::random_field(g, 5 * n);
        const ScalarField sum = para_lt(f, h) + resonant(f, h) + para_gt(f, h);
        CHECK(testutil::max_abs_diff(sum, f * h) < 1e-12);
        CHECK(testutil::max_abs_diff(para_le(f, h), para_lt(f, h) + resonant(f, h)) < 1e-13);
        CHECK(testutil::max_abs_diff(para_ge(f, h), para_gt(f, h) + resonant(f, h)) < 1e-13);
        const ScalarField zero(g);
        CHECK(sup_norm(para_lt(f, zero)) == 0.0);
        CHECK(sup_norm(resonant(f, zero)) == 0.0);
        CHECK(sup_norm(para_gt(f, zero)) == 0.0);
    }
    CHECK_THROWS(para_lt(ScalarField(make_grid(16)), ScalarField(make_grid(32))));
}

TEST_CASE("paraproduct of separated blocks") {
    const TorusGrid g = make_grid(128);
    const DyadicPartition& p = dyadic_partition(g);
    REQUIRE(p.weight(5, 44, 0) == 1.0);
    REQUIRE(p.weight(1, 3, 0) == 1.0);
    const ScalarField f = mode(g, 44, 0);
    const ScalarField h = mode(g, 0, 3);
    CHECK(testutil::max_abs_diff(para_gt(f, h), f * h) < 1e-12);
    CHECK(sup_norm(para_lt(f, h)) < 1e-12);
    CHECK(sup_norm(resonant(f, h)) < 1e-12);
}

TEST_CASE("vector paraproducts act componentwise") {
    const TorusGrid g = make_grid(32);
    const ScalarField f = testutil::random_field(g, 1);
    const VectorField v = testutil::random_vector(g, 2);
    const VectorField a = para_lt(v, f);
    const VectorField b = para_ge(f, v);
    for (int k = 0; k < 2; ++k) {
        CHECK(testutil::max_abs_diff(a.component(k), para_lt(v.component(k), f)) < 1e-14);
        CHECK(testutil::max_abs_diff(b.component(k), para_ge(f, v.component(k))) < 1e-14);
    }
}

TEST_CASE("holder_norm") {
    const TorusGrid g = make_grid(64);
    CHECK(holder_norm(ScalarField(g), 0.5).value == 0.0);
    const ScalarField s = testutil::sample(g, [](double x, double) { return std::sin(two_pi * x); });
    const double v = holder_norm(s, 0.0).value;
    CHECK(v >= 0.5);
    CHECK(v <= 2.0);
    const ScalarField r = testutil::random_field(g, 8);
    for (double alpha : {-1.1, 0.0, 0.7})
        CHECK(holder_norm(-3.0 * r, alpha).value == doctest::Approx(3.0 * holder_norm(r, alpha).value).epsilon(1e-14));
    CHECK(holder_norm(r, -1.0).blocks.size() == 7);
}

TEST_CASE("paraproduct and resonant estimates hold with one constant") {
    // smooth and rough fields built by spectral shaping of random fields
    auto shaped = [](const TorusGrid& g, std::uint64_t seed, double decay) {
        return apply_multiplier(testutil::random_field(g, seed), [&](int k1, int k2) {
            return std::pow(1.0 + k1 * k1 + k2 * k2, -0.5 * decay);
        });
    };
    const TorusGrid g = make_grid(32);
    double worst_lt = 0.0, worst_res = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const double df = trial % 2 ? 3.0 : 0.5;
        const double dg = trial % 3 ? 2.5 : 0.2;
        const ScalarField f = shaped(g, 1000 + trial, df);
        const ScalarField h = shaped(g, 5000 + trial, dg);
        for (double gamma : {-0.5, 0.3, 0.9}) {
            const double lhs = holder_norm(para_lt(f, h), gamma).value;
            worst_lt = std::max(worst_lt, lhs / (sup_norm(f) * holder_norm(h, gamma).value));
        }
        const double a = 0.6, b = -0.3;
        const double lhs = holder_norm(resonant(f, h), a + b).value;
        worst_res = std::max(worst_res, lhs / (holder_norm(f, a).value * holder_norm(h, b).value));
    }
    CHECK(worst_lt <= 10.0);
    CHECK(worst_res <= 10.0);
}

TEST_CASE("weighted space-time norm") {
    const TorusGrid g = make_grid(8);
    ScalarHistory c;
    for (int m = 0; m <= 4; ++m) {
        c.times.push_back(0.1 * m);
        c.frames.push_back(ScalarField(g, -2.0));
    }
    auto rc = weighted_spacetime_norm(c, 0.5, 0.0);
    CHECK(rc.holder_part == 0.0);
    CHECK(rc.sup_part == 2.0);

    // F(t, x) = t: brute force over frame pairs
    ScalarHistory lin;
    for (int m = 0; m <= 4; ++m) {
        lin.times.push_back(0.25 * m);
        lin.frames.push_back(ScalarField(g, 0.25 * m));
    }
    const double alpha = 0.6;
    double brute = 0.0;
    for (int a = 0; a <= 4; ++a)
        for (int b = 0; b < a; ++b) {
            const double dt = lin.times[a] - lin.times[b];
            brute = std::max(brute, dt / std::pow(std::sqrt(dt), alpha));
        }
    const auto rl = weighted_spacetime_norm(lin, alpha, 0.0);
    CHECK(rl.holder_part == doctest::Approx(brute).epsilon(1e-14));
    CHECK(rl.holder_part == doctest::Approx(std::pow(1.0, 1.0 - alpha / 2)).epsilon(1e-14));
    CHECK(rl.t == 1.0);
    CHECK(rl.s == 0.0);
    CHECK_FALSE(rl.subsampled);

    // sigma = 2 with frames 1/t
    ScalarHistory inv;
    for (int m = 1; m <= 5; ++m) {
        inv.times.push_back(0.2 * m);
        inv.frames.push_back(ScalarField(g, 1.0 / (0.2 * m)));
    }
    CHECK(weighted_time_norm(inv, 2.0, SpatialNormKind::Sup).value == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("weighted norm subsamples large inputs") {
    const TorusGrid g = make_grid(32);
    ScalarHistory h;
    for (int m = 0; m <= 8; ++m) {
        h.times.push_back(0.01 * m);
        h.frames.push_back(testutil::random_field(g, m));
    }
    const auto exact = weighted_spacetime_norm(h, 0.5, 0.1);
    const auto sub = weighted_spacetime_norm(h, 0.5, 0.1, 1e5);
    CHECK_FALSE(exact.subsampled);
    CHECK(sub.subsampled);
    CHECK_FALSE(sub.warning.empty());
    CHECK(sub.value <= exact.value + 1e-14);
}

TEST_CASE("upsilon_norm") {
    const TorusGrid g = make_grid(16);
    StochasticVector u;
    ScalarHistory zero;
    for (int m = 0; m <= 4; ++m) {
        zero.times.push_back(0.05 * m);
        zero.frames.push_back(ScalarField(g));
    }
    VectorHistory vz;
    vz.times = zero.times;
    for (int m = 0; m <= 4; ++m) vz.frames.push_back(VectorField(g));
    for (int j = 1; j <= 12; ++j) u.c[j - 1] = (j == 1 || j >= 11) ? scalar_component(zero) : vector_component(vz);
    CHECK(upsilon_norm(u, 0.2).total == 0.0);

    // only Y nonzero and constant in space
    StochasticVector y = u;
    for (int m = 0; m <= 4; ++m) y.c[0].parts[0].frames[m] = ScalarField(g, 0.05 * m);
    UpsilonNormParams p;
    const auto ry = upsilon_norm(y, 0.2, p);
    const double expect = std::pow(0.2, -0.1 * p.kappa) * weighted_spacetime_norm(y.c[0], p.alpha, 0.0).value +
                          time_derivative_holder(y.c[0], -1.0 - p.kappa);
    CHECK(ry.total == doctest::Approx(expect).epsilon(1e-14));
    CHECK(ry.group_A == 0.0);
    CHECK(ry.group_B == 0.0);

    // positive homogeneity
    StochasticVector r = u;
    for (int j = 1; j <= 12; ++j)
        for (int k = 0; k < r.c[j - 1].dim; ++k)
            for (std::size_t m = 0; m < 5; ++m) r.c[j - 1].parts[k].frames[m] = testutil::random_field(g, 100 * j + 10 * k + m);
    StochasticVector r3 = r;
    for (auto& comp : r3.c)
        for (int k = 0; k < comp.dim; ++k)
            for (auto& f : comp.parts[k].frames) f = 3.0 * f;
    CHECK(upsilon_norm(r3, 0.2).total == doctest::Approx(3.0 * upsilon_norm(r, 0.2).total).epsilon(1e-12));

    StochasticVector missing = u;
    missing.c[6] = ComponentHistory{};
    CHECK_THROWS_WITH(upsilon_norm(missing, 0.2), doctest::Contains("missing component"));
}
