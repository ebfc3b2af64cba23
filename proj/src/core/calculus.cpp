#include "calculus.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace homlab {

VectorField fd_gradient(const ScalarField& f) {
    const TorusGrid& g = f.grid;
    const int n = g.n();
    const double inv_h = n;
    VectorField r(g);
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        for (int j = 0; j < n; ++j) {
            const int jp = (j + 1) % n;
            const double fij = f.v[static_cast<std::size_t>(i) * n + j];
            r.c[0][static_cast<std::size_t>(i) * n + j] = (f.v[static_cast<std::size_t>(ip) * n + j] - fij) * inv_h;
            r.c[1][static_cast<std::size_t>(i) * n + j] = (f.v[static_cast<std::size_t>(i) * n + jp] - fij) * inv_h;
        }
    }
    return r;
}

ScalarField fd_divergence(const VectorField& e) {
    const TorusGrid& g = e.grid;
    const int n = g.n();
    const double inv_h = n;
    ScalarField r(g);
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        for (int j = 0; j < n; ++j) {
            const int jm = (j + n - 1) % n;
            const std::size_t id = static_cast<std::size_t>(i) * n + j;
            r.v[id] = (e.c[0][id] - e.c[0][static_cast<std::size_t>(im) * n + j]) * inv_h +
                      (e.c[1][id] - e.c[1][static_cast<std::size_t>(i) * n + jm]) * inv_h;
        }
    }
    return r;
}

VectorField edge_to_node(const VectorField& e) {
    const TorusGrid& g = e.grid;
    const int n = g.n();
    VectorField r(g);
    for (int i = 0; i < n; ++i) {
        const int im = (i + n - 1) % n;
        for (int j = 0; j < n; ++j) {
            const int jm = (j + n - 1) % n;
            const std::size_t id = static_cast<std::size_t>(i) * n + j;
            r.c[0][id] = 0.5 * (e.c[0][id] + e.c[0][static_cast<std::size_t>(im) * n + j]);
            r.c[1][id] = 0.5 * (e.c[1][id] + e.c[1][static_cast<std::size_t>(i) * n + jm]);
        }
    }
    return r;
}

namespace {

std::complex<double> derivative_symbol(int k, int n) {
    if (2 * std::abs(k) == n) return {0.0, 0.0};
    return {0.0, 2.0 * std::numbers::pi * k};
}

}  // namespace

VectorField spectral_gradient(const ScalarField& f) {
    const Spectrum s = fourier_transform(f);
    VectorField r(f.grid);
    for (int dir = 0; dir < 2; ++dir) {
        Spectrum d = s;
        for (int row = 0; row < d.n(); ++row)
            for (int col = 0; col < d.cols(); ++col)
                d.at(row, col) *= derivative_symbol(dir == 0 ? d.k1(row) : d.k2(col), d.n());
        r.c[dir] = inverse_fourier(d).v;
    }
    return r;
}

ScalarField spectral_divergence(const VectorField& v) {
    Spectrum a = fourier_transform(v.component(0));
    const Spectrum b = fourier_transform(v.component(1));
    for (int row = 0; row < a.n(); ++row)
        for (int col = 0; col < a.cols(); ++col)
            a.at(row, col) = a.at(row, col) * derivative_symbol(a.k1(row), a.n()) +
                             b.at(row, col) * derivative_symbol(b.k2(col), b.n());
    return inverse_fourier(a);
}

MatrixField spectral_gradient(const VectorField& v) {
    MatrixField m(v.grid);
    for (int k = 0; k < 2; ++k) {
        const VectorField gk = spectral_gradient(v.component(k));
        m.c[0 * 2 + k] = gk.c[0];
        m.c[1 * 2 + k] = gk.c[1];
    }
    return m;
}

ScalarField spectral_laplacian(const ScalarField& f) {
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return apply_multiplier(f, [&](int k1, int k2) { return -four_pi2 * (k1 * k1 + k2 * k2); });
}

}  // namespace homlab
