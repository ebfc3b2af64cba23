#include "field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace homlab {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

TorusGrid make_grid(int n) {
    if (!is_power_of_two(n)) fail(ErrorKind::InvalidArgument, "grid size " + std::to_string(n) + " is not a power of two");
    if (n < 8) fail(ErrorKind::InvalidArgument, "grid size must be at least 8");
    return TorusGrid(n);
}

TorusGrid make_cell_grid(int n) {
    if (!is_power_of_two(n) || n < 2)
        fail(ErrorKind::InvalidArgument, "cell grid size " + std::to_string(n) + " must be a power of two >= 2");
    return TorusGrid(n);
}

ScalarField VectorField::component(int k) const {
    ScalarField f(grid);
    f.v = c[k];
    return f;
}

void VectorField::set_component(int k, const ScalarField& f) {
    check_same_grid(grid, f.grid, "VectorField::set_component");
    c[k] = f.v;
}

ScalarField MatrixField::entry(int r, int s) const {
    ScalarField f(grid);
    f.v = c[2 * r + s];
    return f;
}

void check_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
    if (!(a == b)) fail(ErrorKind::InvalidArgument, std::string(where) + ": grid mismatch");
}

double mean(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / static_cast<double>(f.v.size());
}

ScalarField remove_mean(const ScalarField& f) {
    ScalarField r = f;
    const double m = mean(f);
    for (double& x : r.v) x -= m;
    return r;
}

double inner(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * g.v[i];
    return s * f.grid.h() * f.grid.h();
}

double inner(const VectorField& f, const VectorField& g) {
    check_same_grid(f.grid, g.grid, "inner");
    double s = 0.0;
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < f.c[k].size(); ++i) s += f.c[k][i] * g.c[k][i];
    return s * f.grid.h() * f.grid.h();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double sup_norm(const VectorField& f) {
    double m = 0.0;
    for (const auto& comp : f.c)
        for (double x : comp) m = std::max(m, std::abs(x));
    return m;
}

double sup_norm(const MatrixField& f) {
    double m = 0.0;
    for (const auto& comp : f.c)
        for (double x : comp) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

namespace {

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op, const char* where) {
    check_same_grid(a.grid, b.grid, where);
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] = op(a.v[i], b.v[i]);
    return r;
}

template <class Op>
VectorField zipv(const VectorField& a, const VectorField& b, Op op, const char* where) {
    check_same_grid(a.grid, b.grid, where);
    VectorField r(a.grid);
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < a.c[k].size(); ++i) r.c[k][i] = op(a.c[k][i], b.c[k][i]);
    return r;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "operator+");
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "operator-");
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "operator*");
}
ScalarField operator*(double s, const ScalarField& a) {
    ScalarField r = a;
    for (double& x : r.v) x *= s;
    return r;
}
VectorField operator+(const VectorField& a, const VectorField& b) {
    return zipv(a, b, [](double x, double y) { return x + y; }, "operator+");
}
VectorField operator-(const VectorField& a, const VectorField& b) {
    return zipv(a, b, [](double x, double y) { return x - y; }, "operator-");
}
VectorField operator*(double s, const VectorField& a) {
    VectorField r = a;
    for (auto& comp : r.c)
        for (double& x : comp) x *= s;
    return r;
}
VectorField operator*(const ScalarField& s, const VectorField& a) {
    check_same_grid(s.grid, a.grid, "operator*");
    VectorField r = a;
    for (auto& comp : r.c)
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= s.v[i];
    return r;
}
MatrixField operator-(const MatrixField& a, const MatrixField& b) {
    check_same_grid(a.grid, b.grid, "operator-");
    MatrixField r(a.grid);
    for (int e = 0; e < 4; ++e)
        for (std::size_t i = 0; i < r.c[e].size(); ++i) r.c[e][i] = a.c[e][i] - b.c[e][i];
    return r;
}

ScalarField dot(const VectorField& f, const VectorField& g) {
    check_same_grid(f.grid, g.grid, "dot");
    ScalarField r(f.grid);
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] = f.c[0][i] * g.c[0][i] + f.c[1][i] * g.c[1][i];
    return r;
}

VectorField matvec(const MatrixField& m, const VectorField& v) {
    check_same_grid(m.grid, v.grid, "matvec");
    VectorField r(v.grid);
    for (std::size_t i = 0; i < v.c[0].size(); ++i) {
        r.c[0][i] = m.c[0][i] * v.c[0][i] + m.c[1][i] * v.c[1][i];
        r.c[1][i] = m.c[2][i] * v.c[0][i] + m.c[3][i] * v.c[1][i];
    }
    return r;
}

VectorField matTvec(const MatrixField& m, const VectorField& v) {
    check_same_grid(m.grid, v.grid, "matTvec");
    VectorField r(v.grid);
    for (std::size_t i = 0; i < v.c[0].size(); ++i) {
        r.c[0][i] = m.c[0][i] * v.c[0][i] + m.c[2][i] * v.c[1][i];
        r.c[1][i] = m.c[1][i] * v.c[0][i] + m.c[3][i] * v.c[1][i];
    }
    return r;
}

MatrixField constant_matrix(TorusGrid g, const Mat2& m) {
    MatrixField r(g);
    std::fill(r.c[0].begin(), r.c[0].end(), m.a11);
    std::fill(r.c[1].begin(), r.c[1].end(), m.a12);
    std::fill(r.c[2].begin(), r.c[2].end(), m.a21);
    std::fill(r.c[3].begin(), r.c[3].end(), m.a22);
    return r;
}

VectorField constant_vector(TorusGrid g, double x, double y) {
    VectorField r(g);
    std::fill(r.c[0].begin(), r.c[0].end(), x);
    std::fill(r.c[1].begin(), r.c[1].end(), y);
    return r;
}

}  // namespace homlab
