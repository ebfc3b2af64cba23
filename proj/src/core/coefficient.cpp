#include "coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calculus.hpp"

namespace homlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double y) { return y - std::floor(y); }

void sym_eigs(const Mat2& a, double& lo, double& hi) {
    const double s12 = 0.5 * (a.a12 + a.a21);
    const double tr = a.a11 + a.a22;
    const double det = a.a11 * a.a22 - s12 * s12;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    lo = 0.5 * tr - disc;
    hi = 0.5 * tr + disc;
}

}  // namespace

CoefficientSpec CoefficientSpec::identity() { return CoefficientSpec{}; }

CoefficientSpec CoefficientSpec::laminate(double base, double amplitude) {
    CoefficientSpec s;
    s.kind = CoefficientKind::Laminate;
    s.base = base;
    s.amplitude = amplitude;
    return s;
}

CoefficientSpec CoefficientSpec::trig(double base, double amplitude, double skew) {
    CoefficientSpec s;
    s.kind = CoefficientKind::TrigPolynomial;
    s.base = base;
    s.amplitude = amplitude;
    s.skew = skew;
    return s;
}

CoefficientSpec CoefficientSpec::tabulated(int cell_n, std::vector<Mat2> values) {
    require(cell_n >= 1 && values.size() == static_cast<std::size_t>(cell_n) * cell_n,
            "tabulated coefficient needs cell_n^2 values");
    CoefficientSpec s;
    s.kind = CoefficientKind::Tabulated;
    s.cell_n = cell_n;
    s.table = std::move(values);
    return s;
}

Mat2 CoefficientSpec::evaluate(double y1, double y2) const {
    switch (kind) {
        case CoefficientKind::Identity:
            return Mat2::identity();
        case CoefficientKind::Laminate: {
            const double s = base + amplitude * std::sin(kTwoPi * y1);
            return {s, 0.0, 0.0, s};
        }
        case CoefficientKind::TrigPolynomial: {
            const double a11 = base + amplitude * (0.5 * std::sin(kTwoPi * y1) + 0.2 * std::cos(kTwoPi * y2));
            const double a22 = base + amplitude * (0.4 * std::cos(kTwoPi * y1) + 0.3 * std::sin(kTwoPi * (y1 + y2)));
            const double s12 = 0.3 * amplitude * std::sin(kTwoPi * (y1 - y2));
            const double k12 = skew * std::cos(kTwoPi * y2);
            return {a11, s12 + k12, s12 - k12, a22};
        }
        case CoefficientKind::Tabulated: {
            const double u = frac(y1) * cell_n;
            const double v = frac(y2) * cell_n;
            const int i0 = static_cast<int>(std::floor(u)) % cell_n;
            const int j0 = static_cast<int>(std::floor(v)) % cell_n;
            const int i1 = (i0 + 1) % cell_n;
            const int j1 = (j0 + 1) % cell_n;
            const double fu = u - std::floor(u);
            const double fv = v - std::floor(v);
            auto at = [&](int i, int j) { return table[static_cast<std::size_t>(i) * cell_n + j]; };
            auto lerp = [&](double (Mat2::*m)) {
                return (1 - fu) * (1 - fv) * (at(i0, j0).*m) + fu * (1 - fv) * (at(i1, j0).*m) +
                       (1 - fu) * fv * (at(i0, j1).*m) + fu * fv * (at(i1, j1).*m);
            };
            return {lerp(&Mat2::a11), lerp(&Mat2::a12), lerp(&Mat2::a21), lerp(&Mat2::a22)};
        }
    }
    return Mat2::identity();
}

bool CoefficientSpec::symmetric() const {
    switch (kind) {
        case CoefficientKind::Identity:
        case CoefficientKind::Laminate:
            return true;
        case CoefficientKind::TrigPolynomial:
            return skew == 0.0;
        case CoefficientKind::Tabulated:
            return std::all_of(table.begin(), table.end(), [](const Mat2& m) { return m.a12 == m.a21; });
    }
    return true;
}

std::string CoefficientSpec::name() const {
    switch (kind) {
        case CoefficientKind::Identity: return "identity";
        case CoefficientKind::Laminate: return "laminate";
        case CoefficientKind::TrigPolynomial: return "trig";
        case CoefficientKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

EllipticBounds ellipticity_bounds(const CoefficientSpec& spec) {
    const int m = spec.kind == CoefficientKind::Tabulated ? std::max(64, 4 * spec.cell_n) : 256;
    EllipticBounds b{1e300, -1e300};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            for (double off : {0.0, 0.5}) {
                double lo, hi;
                sym_eigs(spec.evaluate((i + off) / m, (j + off) / m), lo, hi);
                b.lambda = std::min(b.lambda, lo);
                b.Lambda = std::max(b.Lambda, hi);
            }
        }
    return b;
}

namespace {

void fill_samples(MatrixField& mf, const CoefficientSpec& spec, int n, int N, double off1, double off2) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double y1 = frac(static_cast<double>(N) * (i + off1) / n);
            const double y2 = frac(static_cast<double>(N) * (j + off2) / n);
            const Mat2 a = spec.evaluate(y1, y2);
            const std::size_t id = static_cast<std::size_t>(i) * n + j;
            mf.c[0][id] = a.a11;
            mf.c[1][id] = a.a12;
            mf.c[2][id] = a.a21;
            mf.c[3][id] = a.a22;
        }
}

bool is_diagonal(const CoefficientField& f) {
    auto zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    return zero(f.xedge.c[1]) && zero(f.xedge.c[2]) && zero(f.yedge.c[1]) && zero(f.yedge.c[2]);
}

}  // namespace

CoefficientField sample_coefficient(const CoefficientSpec& spec, const TorusGrid& grid, int N) {
    if (N < 1 || grid.n() % N != 0)
        fail(ErrorKind::InvalidArgument, "unresolved oscillation: N = " + std::to_string(N) +
                                             " does not divide n = " + std::to_string(grid.n()));
    CoefficientField f;
    f.grid = grid;
    f.periods = N;
    f.node = MatrixField(grid);
    f.xedge = MatrixField(grid);
    f.yedge = MatrixField(grid);
    fill_samples(f.node, spec, grid.n(), N, 0.0, 0.0);
    fill_samples(f.xedge, spec, grid.n(), N, 0.5, 0.0);
    fill_samples(f.yedge, spec, grid.n(), N, 0.0, 0.5);
    f.bounds = ellipticity_bounds(spec);
    if (f.bounds.lambda <= 0.0) fail(ErrorKind::InvalidArgument, "coefficient is not uniformly elliptic");
    f.symmetric = spec.symmetric();
    f.diagonal = is_diagonal(f);
    f.constant = spec.kind == CoefficientKind::Identity;
    f.constant_value = Mat2::identity();
    if (spec.kind == CoefficientKind::Tabulated)
        f.warnings.push_back("tabulated coefficient: Holder continuity is not verified");
    for (const auto* m : {&f.node, &f.xedge, &f.yedge})
        for (const auto& comp : m->c)
            if (!all_finite(comp)) fail(ErrorKind::InvalidArgument, "coefficient has non-finite samples");
    return f;
}

CoefficientField constant_coefficient(const TorusGrid& grid, const Mat2& a) {
    CoefficientField f;
    f.grid = grid;
    f.periods = 1;
    f.node = constant_matrix(grid, a);
    f.xedge = f.node;
    f.yedge = f.node;
    double lo, hi;
    sym_eigs(a, lo, hi);
    if (lo <= 0.0) fail(ErrorKind::InvalidArgument, "constant coefficient is not elliptic");
    f.bounds = {lo, hi};
    f.symmetric = a.a12 == a.a21;
    f.diagonal = a.a12 == 0.0 && a.a21 == 0.0;
    f.constant = true;
    f.constant_value = a;
    return f;
}

CoefficientField CoefficientField::transpose() const {
    CoefficientField t = *this;
    for (auto* m : {&t.node, &t.xedge, &t.yedge}) std::swap(m->c[1], m->c[2]);
    t.constant_value = constant_value.transpose();
    return t;
}

VectorField apply_flux(const CoefficientField& a, const VectorField& g) {
    check_same_grid(a.grid, g.grid, "apply_flux");
    const int n = g.grid.n();
    VectorField f(g.grid);
    const auto& ax = a.xedge.c;
    const auto& ay = a.yedge.c;
    auto id = [n](int i, int j) {
        return static_cast<std::size_t>((i + n) % n) * n + static_cast<std::size_t>((j + n) % n);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t c = id(i, j);
            f.c[0][c] = ax[0][c] * g.c[0][c];
            f.c[1][c] = ay[3][c] * g.c[1][c];
        }
    if (a.diagonal) return f;
    // x-edge (i+1/2, j) sees y-edges (i,j), (i,j-1), (i+1,j), (i+1,j-1);
    // y-edge (i, j+1/2) sees x-edges (i,j), (i-1,j), (i,j+1), (i-1,j+1).
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t c = id(i, j);
            const std::size_t y0 = id(i, j), y1 = id(i, j - 1), y2 = id(i + 1, j), y3 = id(i + 1, j - 1);
            const double avg_g2 = 0.25 * (g.c[1][y0] + g.c[1][y1] + g.c[1][y2] + g.c[1][y3]);
            const double avg_a12g2 = 0.25 * (ay[1][y0] * g.c[1][y0] + ay[1][y1] * g.c[1][y1] +
                                             ay[1][y2] * g.c[1][y2] + ay[1][y3] * g.c[1][y3]);
            f.c[0][c] += 0.5 * (ax[1][c] * avg_g2 + avg_a12g2);

            const std::size_t x0 = id(i, j), x1 = id(i - 1, j), x2 = id(i, j + 1), x3 = id(i - 1, j + 1);
            const double avg_g1 = 0.25 * (g.c[0][x0] + g.c[0][x1] + g.c[0][x2] + g.c[0][x3]);
            const double avg_a21g1 = 0.25 * (ax[2][x0] * g.c[0][x0] + ax[2][x1] * g.c[0][x1] +
                                             ax[2][x2] * g.c[0][x2] + ax[2][x3] * g.c[0][x3]);
            f.c[1][c] += 0.5 * (ay[2][c] * avg_g1 + avg_a21g1);
        }
    return f;
}

ScalarField apply_elliptic(const CoefficientField& a, const ScalarField& u) {
    return fd_divergence(apply_flux(a, fd_gradient(u)));
}

VectorField divergence_of_coefficient(const CoefficientField& a) {
    VectorField d(a.grid);
    for (int k = 0; k < 2; ++k) {
        const VectorField ek = constant_vector(a.grid, k == 0 ? 1.0 : 0.0, k == 0 ? 0.0 : 1.0);
        d.c[k] = fd_divergence(apply_flux(a, ek)).v;
    }
    return d;
}

Mat2 discrete_mean(const CoefficientField& a) {
    Mat2 m;
    for (int k = 0; k < 2; ++k) {
        const VectorField ek = constant_vector(a.grid, k == 0 ? 1.0 : 0.0, k == 0 ? 0.0 : 1.0);
        const VectorField fl = apply_flux(a, ek);
        const double m0 = mean(fl.component(0));
        const double m1 = mean(fl.component(1));
        if (k == 0) {
            m.a11 = m0;
            m.a21 = m1;
        } else {
            m.a12 = m0;
            m.a22 = m1;
        }
    }
    return m;
}

}  // namespace homlab
