#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace homlab {

/// Uniform n x n grid on the unit torus. Node (i, j) sits at (i h, j h); the
/// first index runs along x1 and is the slow one in storage.
class TorusGrid {
public:
    TorusGrid() = default;

    int n() const noexcept { return n_; }
    double h() const noexcept { return 1.0 / n_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(wrap(i)) * n_ + wrap(j);
    }
    int wrap(int i) const noexcept {
        int r = i % n_;
        return r < 0 ? r + n_ : r;
    }

    bool operator==(const TorusGrid& o) const noexcept { return n_ == o.n_; }

    friend TorusGrid make_grid(int n);
    friend TorusGrid make_cell_grid(int n);

private:
    explicit TorusGrid(int n) : n_(n) {}
    int n_ = 0;
};

bool is_power_of_two(int n);

/// Simulation grid: n must be a power of two and at least 8.
TorusGrid make_grid(int n);

/// Unit-cell grid for corrector problems; only needs n >= 2 and a power of two,
/// since a cell may be resolved by as few as n/N nodes of the physical grid.
TorusGrid make_cell_grid(int n);

struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(TorusGrid g, double value = 0.0) : grid(g), v(g.size(), value) {}

    double& operator()(int i, int j) { return v[grid.index(i, j)]; }
    double operator()(int i, int j) const { return v[grid.index(i, j)]; }
};

/// Two components per node. Whether the k-th component lives at the node or
/// at the edge midpoint x + h/2 e_k is a property of the producing operator.
struct VectorField {
    TorusGrid grid;
    std::array<std::vector<double>, 2> c;

    VectorField() = default;
    explicit VectorField(TorusGrid g) : grid(g) {
        c[0].assign(g.size(), 0.0);
        c[1].assign(g.size(), 0.0);
    }
    ScalarField component(int k) const;
    void set_component(int k, const ScalarField& f);
};

/// Row-major 2x2 matrix per node: c[2*r + s] holds entry (r, s).
struct MatrixField {
    TorusGrid grid;
    std::array<std::vector<double>, 4> c;

    MatrixField() = default;
    explicit MatrixField(TorusGrid g) : grid(g) {
        for (auto& x : c) x.assign(g.size(), 0.0);
    }
    ScalarField entry(int r, int s) const;
};

template <class Frame>
struct SpaceTimeField {
    std::vector<double> times;
    std::vector<Frame> frames;

    std::size_t size() const noexcept { return frames.size(); }
    bool empty() const noexcept { return frames.empty(); }
};

using ScalarHistory = SpaceTimeField<ScalarField>;
using VectorHistory = SpaceTimeField<VectorField>;
using MatrixHistory = SpaceTimeField<MatrixField>;

struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    double quad(double x, double y) const { return x * (a11 * x + a12 * y) + y * (a21 * x + a22 * y); }
};

// Quadrature and pointwise helpers. All integrals are node sums times h^2.
double mean(const ScalarField& f);
ScalarField remove_mean(const ScalarField& f);
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& f, const VectorField& g);
double l2_norm(const ScalarField& f);
double sup_norm(const ScalarField& f);
double sup_norm(const VectorField& f);
double sup_norm(const MatrixField& f);
bool all_finite(std::span<const double> v);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
VectorField operator*(const ScalarField& s, const VectorField& a);
MatrixField operator-(const MatrixField& a, const MatrixField& b);

/// Pointwise f . g for vector fields.
ScalarField dot(const VectorField& f, const VectorField& g);
/// Pointwise M v.
VectorField matvec(const MatrixField& m, const VectorField& v);
/// Pointwise M^T v.
VectorField matTvec(const MatrixField& m, const VectorField& v);
MatrixField constant_matrix(TorusGrid g, const Mat2& m);
VectorField constant_vector(TorusGrid g, double x, double y);

void check_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

/// Node coordinate helper.
inline double node_x(const TorusGrid& g, int i) { return i * g.h(); }

}  // namespace homlab
