#pragma once

#include <complex>
#include <vector>

#include "coefficient.hpp"
#include "fft.hpp"

namespace homlab {

struct SolverOptions {
    double tol = 1e-12;  // relative residual
    int max_iter = 2000;
};

/// FiniteDifference is the staggered stencil used everywhere a_eps appears.
/// Spectral applies div(a grad .) with Fourier derivatives and node samples of
/// a; it converges spectrally for smooth cell problems.
enum class Backend { FiniteDifference, Spectral };

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// L = div(a grad .) on the staggered grid, plus the solvers every module
/// needs: shifted systems (I - dt L) u = b for implicit time steps and the
/// mean-zero problem -L u = b.
///
/// Constant coefficients are Fourier-diagonal, so those systems are solved
/// exactly by division by the stencil symbol. Variable coefficients use
/// preconditioned CG (symmetric) or BiCGStab (nonsymmetric), preconditioned
/// by the constant-coefficient operator of the discrete mean of a.
class EllipticOperator {
public:
    EllipticOperator() = default;
    explicit EllipticOperator(CoefficientField a, SolverOptions opts = {}, Backend backend = Backend::FiniteDifference);

    const CoefficientField& coefficient() const { return a_; }
    const TorusGrid& grid() const { return a_.grid; }
    bool symmetric() const { return a_.symmetric; }
    bool constant() const { return a_.constant; }
    const SolverOptions& options() const { return opts_; }
    Backend backend() const { return backend_; }

    ScalarField apply(const ScalarField& u) const;
    /// Operator of a^T, the discrete adjoint of this one.
    EllipticOperator adjoint() const;

    /// Solves (I - dt L) u = b. `guess` seeds the iteration when non-null.
    ScalarField solve_shifted(const ScalarField& b, double dt, const ScalarField* guess = nullptr,
                              SolveStats* stats = nullptr) const;
    /// Solves -L u = b for mean-zero b, returning the mean-zero solution.
    ScalarField solve_poisson(const ScalarField& b, SolveStats* stats = nullptr) const;

    /// Fourier symbol sigma(k) of -L for a constant coefficient, laid out like
    /// Spectrum::c. Exposed for tests.
    static std::vector<std::complex<double>> symbol_of(const TorusGrid& g, const Mat2& a,
                                                      Backend backend = Backend::FiniteDifference);

private:
    ScalarField precondition(const ScalarField& r, double shift, double scale) const;
    ScalarField apply_system(const ScalarField& u, double shift, double scale) const;
    ScalarField krylov(const ScalarField& b, double shift, double scale, bool project, const ScalarField* guess,
                       SolveStats* stats) const;
    int iterate(ScalarField& x, ScalarField r, double bnorm, double shift, double scale, bool project,
                int budget) const;

    CoefficientField a_;
    SolverOptions opts_;
    Backend backend_ = Backend::FiniteDifference;
    std::vector<std::complex<double>> symbol_;  // of the constant part / preconditioner
};

}  // namespace homlab
