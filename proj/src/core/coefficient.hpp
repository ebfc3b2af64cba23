#pragma once

#include <string>
#include <vector>

#include "field.hpp"

namespace homlab {

enum class CoefficientKind { Identity, Laminate, TrigPolynomial, Tabulated };

/// Generator for a 1-periodic elliptic matrix a(y).
///
/// Laminate: a(y) = (base + amplitude sin 2 pi y1) Id.
/// TrigPolynomial: a smooth full matrix with a symmetric oscillating part of
/// size `amplitude` around base*Id plus an antisymmetric part of size `skew`.
/// Tabulated: values on a cell_n x cell_n unit-cell grid, interpolated
/// bilinearly; these may be rough, so they only raise a warning.
struct CoefficientSpec {
    CoefficientKind kind = CoefficientKind::Identity;
    double base = 2.0;
    double amplitude = 1.0;
    double skew = 0.0;
    int cell_n = 0;
    std::vector<Mat2> table;

    static CoefficientSpec identity();
    static CoefficientSpec laminate(double base = 2.0, double amplitude = 1.0);
    static CoefficientSpec trig(double base = 2.0, double amplitude = 1.0, double skew = 0.0);
    static CoefficientSpec tabulated(int cell_n, std::vector<Mat2> values);

    Mat2 evaluate(double y1, double y2) const;
    bool symmetric() const;
    std::string name() const;
};

struct EllipticBounds {
    double lambda = 1.0;
    double Lambda = 1.0;
};

/// Bounds of the symmetric part of a over a dense sample of the unit cell.
EllipticBounds ellipticity_bounds(const CoefficientSpec& spec);

/// a(N x) sampled at nodes and at both families of edge midpoints. The
/// staggered operator only reads the edge samples.
struct CoefficientField {
    TorusGrid grid;
    int periods = 1;
    MatrixField node;
    MatrixField xedge;
    MatrixField yedge;
    EllipticBounds bounds;
    bool symmetric = true;
    bool diagonal = true;
    bool constant = false;
    Mat2 constant_value;
    std::vector<std::string> warnings;

    CoefficientField transpose() const;
};

/// Samples a(./eps) with eps = 1/N; N must divide grid.n().
CoefficientField sample_coefficient(const CoefficientSpec& spec, const TorusGrid& grid, int N);
CoefficientField constant_coefficient(const TorusGrid& grid, const Mat2& a);

/// Edge-located flux a grad u for an edge-located gradient. Off-diagonal
/// entries couple the two edge families through the four-point average,
/// symmetrised so that the transpose of the operator is the operator of a^T.
VectorField apply_flux(const CoefficientField& a, const VectorField& edge_grad);

/// L u = div(a grad u) on the staggered grid.
ScalarField apply_elliptic(const CoefficientField& a, const ScalarField& u);

/// (div a)_k = div(a e_k), one scalar field per column.
VectorField divergence_of_coefficient(const CoefficientField& a);

/// Discrete mean of the flux of the constant field e_k, i.e. the matrix
/// â(0) seen by the staggered stencil.
Mat2 discrete_mean(const CoefficientField& a);

}  // namespace homlab
