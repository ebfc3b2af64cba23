#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "calculus.hpp"
#include "coefficient.hpp"
#include "elliptic.hpp"
#include "fft.hpp"
#include "field_io.hpp"
#include "test_helpers.hpp"

using namespace homlab;
using testutil::two_pi;

TEST_CASE("make_grid sizes and rejection") {
    const TorusGrid g8 = make_grid(8);
    CHECK(g8.size() == 64);
    CHECK(g8.h() == 0.125);
    CHECK(make_grid(256).size() == 65536);
    try {
        make_grid(12);
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("not a power of two") != std::string::npos);
    }
    CHECK_THROWS(make_grid(4));
    CHECK(g8.index(-1, 8) == g8.index(7, 0));
}

TEST_CASE("sample_coefficient") {
    const TorusGrid g = make_grid(64);
    const CoefficientField id = sample_coefficient(CoefficientSpec::identity(), g, 4);
    CHECK(sup_norm(id.node - constant_matrix(g, Mat2::identity())) == 0.0);

    const CoefficientField lam = sample_coefficient(CoefficientSpec::laminate(), g, 4);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            CHECK(lam.node.c[0][g.index(i, j)] == doctest::Approx(lam.node.c[0][g.index(i + 16, j)]).epsilon(1e-14));
            CHECK(lam.node.c[0][g.index(i, j)] == lam.node.c[0][g.index(i, 0)]);
        }
    CHECK(lam.node.c[0][g.index(4, 0)] == doctest::Approx(3.0));
    CHECK(lam.bounds.lambda == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(lam.bounds.Lambda == doctest::Approx(3.0).epsilon(1e-6));

    CHECK_THROWS_WITH(sample_coefficient(CoefficientSpec::laminate(), g, 3),
                      doctest::Contains("unresolved oscillation"));
}

TEST_CASE("cell averages of the sampled coefficient reproduce its mean") {
    const TorusGrid g = make_grid(64);
    for (const auto& spec : {CoefficientSpec::laminate(), CoefficientSpec::trig(2.0, 1.0, 0.3)}) {
        const CoefficientField a = sample_coefficient(spec, g, 4);
        const int m = 16;
        for (int e = 0; e < 4; ++e) {
            const double whole = mean(a.node.entry(e / 2, e % 2));
            for (int ci = 0; ci < 4; ++ci)
                for (int cj = 0; cj < 4; ++cj) {
                    double s = 0.0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j) s += a.node.c[e][g.index(ci * m + i, cj * m + j)];
                    CHECK(std::abs(s / (m * m) - whole) < 1e-12);
                }
        }
    }
}

TEST_CASE("gradient and divergence") {
    for (int n : {8, 32, 256}) {
        const TorusGrid g = make_grid(n);
        const ScalarField f = testutil::random_field(g, 11 + n);
        const VectorField F = testutil::random_vector(g, 29 + n);
        const double lhs = inner(fd_gradient(f), F) + inner(f, fd_divergence(F));
        CHECK(std::abs(lhs) <= 1e-12 * std::max(1.0, l2_norm(f) * std::sqrt(inner(F, F))));
    }
    const TorusGrid g = make_grid(32);
    CHECK(sup_norm(fd_gradient(ScalarField(g, 3.0))) == 0.0);

    // second order at edge midpoints, error <= C h^2 |k|^3
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        const TorusGrid gn = make_grid(n);
        const ScalarField f = testutil::sample(gn, [](double x, double) { return std::sin(two_pi * x); });
        const VectorField d = fd_gradient(f);
        double err = 0.0;
        for (int i = 0; i < n; ++i)
            err = std::max(err, std::abs(d.c[0][gn.index(i, 0)] - two_pi * std::cos(two_pi * (i + 0.5) / n)));
        CHECK(err <= 2.0 * std::pow(two_pi, 3) / (n * n));
        CHECK(sup_norm(d.component(1)) == 0.0);
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("mean and remove_mean") {
    const TorusGrid g = make_grid(32);
    const ScalarField c(g, 3.0);
    CHECK(mean(c) == 3.0);
    CHECK(sup_norm(remove_mean(c)) == 0.0);
    const ScalarField s = testutil::sample(g, [](double x, double) { return std::sin(two_pi * x); });
    CHECK(std::abs(mean(s)) < 1e-14);
    CHECK(std::abs(mean(remove_mean(testutil::random_field(g, 5)))) < 1e-14);
}

TEST_CASE("fourier transform") {
    const TorusGrid g = make_grid(16);
    const ScalarField c2 = testutil::sample(g, [](double, double y) { return std::cos(two_pi * y); });
    const Spectrum s = fourier_transform(c2);
    for (int r = 0; r < s.n(); ++r)
        for (int col = 0; col < s.cols(); ++col) {
            const double expect = (s.k1(r) == 0 && s.k2(col) == 1) ? 0.5 : 0.0;
            CHECK(std::abs(s.at(r, col) - expect) < 1e-14);
        }
    const TorusGrid g64 = make_grid(64);
    const ScalarField f = testutil::random_field(g64, 99);
    CHECK(testutil::max_abs_diff(inverse_fourier(fourier_transform(f)), f) < 1e-12);
    // Parseval against a direct node sum
    double direct = 0.0;
    for (double x : f.v) direct += x * x * g64.h() * g64.h();
    CHECK(spectral_energy(fourier_transform(f)) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("spectral calculus") {
    const TorusGrid g = make_grid(32);
    const ScalarField f = testutil::sample(g, [](double x, double y) { return std::sin(two_pi * x) * std::cos(2 * two_pi * y); });
    const ScalarField lap = spectral_laplacian(f);
    CHECK(testutil::max_abs_diff(lap, -5.0 * two_pi * two_pi * f) < 1e-9);
    CHECK(testutil::max_abs_diff(spectral_divergence(spectral_gradient(f)), lap) < 1e-9);
}

TEST_CASE("elliptic operator basics") {
    const TorusGrid g = make_grid(32);
    for (const auto& spec : {CoefficientSpec::laminate(), CoefficientSpec::trig(2.0, 1.0, 0.4)}) {
        const EllipticOperator L(sample_coefficient(spec, g, 2));
        CHECK(sup_norm(L.apply(ScalarField(g, 1.0))) < 1e-12);
        const ScalarField f = testutil::random_field(g, 3);
        CHECK(std::abs(mean(L.apply(f))) < 1e-12);
        // adjoint operator is the operator of a^T
        const ScalarField q = testutil::random_field(g, 4);
        CHECK(std::abs(inner(L.apply(f), q) - inner(f, L.adjoint().apply(q))) < 1e-9);

        SolveStats st;
        const ScalarField u = L.solve_shifted(f, 0.01, nullptr, &st);
        const ScalarField back = u - 0.01 * L.apply(u);
        CHECK(testutil::max_abs_diff(back, f) < 1e-10);
        CHECK(st.relative_residual <= 1e-11);

        const ScalarField rhs = remove_mean(f);
        const ScalarField p = L.solve_poisson(rhs);
        CHECK(std::abs(mean(p)) < 1e-13);
        CHECK(testutil::max_abs_diff(-1.0 * L.apply(p), rhs) < 1e-8);
    }
}

TEST_CASE("constant operator solves exactly in Fourier space") {
    const TorusGrid g = make_grid(32);
    const Mat2 a{1.5, 0.3, 0.3, 0.8};
    const EllipticOperator L(constant_coefficient(g, a));
    const ScalarField f = testutil::random_field(g, 17);
    const ScalarField u = L.solve_shifted(f, 0.05);
    CHECK(testutil::max_abs_diff(u - 0.05 * L.apply(u), f) < 1e-12);
    const ScalarField p = L.solve_poisson(f);
    CHECK(testutil::max_abs_diff(-1.0 * L.apply(p), remove_mean(f)) < 1e-10);
}

TEST_CASE("binary field file roundtrip") {
    const TorusGrid g = make_grid(8);
    ScalarHistory h;
    h.times = {0.0, 0.5};
    h.frames = {testutil::random_field(g, 1), testutil::random_field(g, 2)};
    const auto path = (std::filesystem::temp_directory_path() / "homlab_io_test.bin").string();
    write_field_file(path, to_file(h));
    const FieldFile back = read_field_file(path);
    CHECK(back.n == 8);
    CHECK(back.components == 1);
    CHECK(back.times == h.times);
    CHECK(scalar_from_file(back, 1).v == h.frames[1].v);
    std::filesystem::remove(path);
}
