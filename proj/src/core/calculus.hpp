#pragma once

#include "field.hpp"

namespace homlab {

// Finite-difference calculus on the staggered grid. fd_gradient returns the
// forward differences, component k located at the edge midpoint x + h/2 e_k;
// fd_divergence is minus its adjoint, so <D f, F> = -<f, div F> holds to
// rounding for every f and F.
VectorField fd_gradient(const ScalarField& f);
ScalarField fd_divergence(const VectorField& edge);

/// Averages the two edges adjacent to each node along direction k.
VectorField edge_to_node(const VectorField& edge);

// Spectral calculus on node-located fields. The Nyquist row/column is
// dropped from derivatives so that outputs stay real.
VectorField spectral_gradient(const ScalarField& f);
ScalarField spectral_divergence(const VectorField& node);
/// (grad V)_{ik} = d_i V_k, the 2 x m gradient convention.
MatrixField spectral_gradient(const VectorField& v);
ScalarField spectral_laplacian(const ScalarField& f);

}  // namespace homlab
