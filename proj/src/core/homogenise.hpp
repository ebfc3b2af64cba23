#pragma once

#include <functional>
#include <vector>

#include "coefficient.hpp"
#include "elliptic.hpp"

namespace homlab {

struct CorrectorPack {
    CoefficientSpec spec;
    TorusGrid cell;          // unit-cell grid
    CoefficientField a;      // a sampled on the cell
    VectorField chi;         // node-located, component k solves the k-th cell problem
    VectorField chi_star;    // same for a^T
    Mat2 abar;
    Mat2 abar_star;          // from a^T; equals abar^T
    Mat2 a0;                 // discrete mean of a
    double tol = 0.0;
    Backend backend = Backend::FiniteDifference;
    std::array<double, 2> solver_residual{};      // relative, per column
    std::array<double, 2> solver_residual_star{};
    double max_divergence = 0.0;                  // max node |div(a(e_k + grad chi_k))|
    std::array<int, 2> iterations{};
};

/// Solves div(a(e_k + grad chi_k)) = 0 with mean(chi_k) = 0 on a cell grid of
/// cell_n points, for a and a^T. `tol` is the relative residual target.
CorrectorPack solve_corrector(const CoefficientSpec& spec, int cell_n, double tol = 1e-10,
                              Backend backend = Backend::FiniteDifference);

/// Periodic tiling of a cell field onto a grid with N cells per direction.
ScalarField tile(const ScalarField& cell, const TorusGrid& grid, int N);

struct PhiFields {
    MatrixField phi;       // entry (i, k) = delta_ik + d_i chi_k(./eps), row i on the i-edge
    MatrixField phi_star;
};

PhiFields phi_fields(const CorrectorPack& pack, int N, const TorusGrid& grid);

/// Column k of an edge-located matrix field as an edge vector field.
VectorField matrix_column(const MatrixField& m, int k);

/// max over nodes and columns of |div(a_eps Phi_eps e_k)|.
double check_flux_divfree(const CoefficientField& a_eps, const MatrixField& phi);

/// eps chi(x/eps) on the grid, node-located.
VectorField scaled_corrector(const CorrectorPack& pack, int N, const TorusGrid& grid, bool star = false);

/// (mean(a^{-1}))^{-1} over node samples: the lower Voigt-Reuss bound.
Mat2 harmonic_mean(const CoefficientField& a);

struct OscillationEntry {
    int N = 0;
    double pairing = 0.0;
    double bound = 0.0;   // eps^theta |f|_{L1} |phi|_{C^theta}
    double ratio = 0.0;
};

struct OscillationReport {
    double theta = 1.0;
    std::vector<OscillationEntry> entries;
    double constant = 0.0;  // max ratio over the eps list
};

/// Pairs f(N x) against phi for every N. f is a mean-zero cell field,
/// evaluated at N x by trigonometric interpolation so any N may be used.
OscillationReport oscillation_pairing(const ScalarField& f_cell, const ScalarField& phi, const std::vector<int>& Ns,
                                      double theta);

}  // namespace homlab
