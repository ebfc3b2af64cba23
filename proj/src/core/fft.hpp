#pragma once

#include <complex>
#include <vector>

#include "field.hpp"

namespace homlab {

/// Half-plane Fourier coefficients of a real field, normalised so that
/// f̂(k) = h^2 sum_x f(x) exp(-2 pi i k.x) approximates the continuum
/// coefficient and f(x) = sum_k f̂(k) exp(2 pi i k.x).
///
/// Storage is n rows (k1) by n/2+1 columns (k2 >= 0).
struct Spectrum {
    TorusGrid grid;
    std::vector<std::complex<double>> c;

    int n() const { return grid.n(); }
    int cols() const { return grid.n() / 2 + 1; }
    std::complex<double>& at(int r, int col) { return c[static_cast<std::size_t>(r) * cols() + col]; }
    const std::complex<double>& at(int r, int col) const { return c[static_cast<std::size_t>(r) * cols() + col]; }

    /// Signed wavenumber of storage row r.
    int k1(int r) const { return r <= n() / 2 ? r : r - n(); }
    int k2(int col) const { return col; }
    /// Number of full-plane modes represented by storage column col.
    double multiplicity(int col) const { return (col == 0 || col == n() / 2) ? 1.0 : 2.0; }
};

Spectrum fourier_transform(const ScalarField& f);
ScalarField inverse_fourier(const Spectrum& s);

/// Applies a real radial-or-general multiplier m(k1, k2) in Fourier space.
template <class Multiplier>
ScalarField apply_multiplier(const ScalarField& f, Multiplier&& m) {
    Spectrum s = fourier_transform(f);
    for (int r = 0; r < s.n(); ++r)
        for (int col = 0; col < s.cols(); ++col) s.at(r, col) *= m(s.k1(r), s.k2(col));
    return inverse_fourier(s);
}

/// Sum over all modes of |f̂(k)|^2.
double spectral_energy(const Spectrum& s);

}  // namespace homlab
