#include "homogenise.hpp"

#include <cmath>
#include <numbers>

#include "calculus.hpp"
#include "fft.hpp"
#include "littlewood_paley.hpp"

namespace homlab {

namespace {

struct ColumnSolve {
    ScalarField chi;
    SolveStats stats;
};

// a (e_k + grad chi) in the operator's discretisation
VectorField corrected_flux(const EllipticOperator& L, const ScalarField& chi, int k) {
    const CoefficientField& a = L.coefficient();
    if (L.backend() == Backend::FiniteDifference) {
        VectorField grad = fd_gradient(chi);
        for (auto& x : grad.c[k]) x += 1.0;
        return apply_flux(a, grad);
    }
    VectorField grad = spectral_gradient(chi);
    for (auto& x : grad.c[k]) x += 1.0;
    return matvec(a.node, grad);
}

ScalarField divergence(const EllipticOperator& L, const VectorField& f) {
    return L.backend() == Backend::FiniteDifference ? fd_divergence(f) : spectral_divergence(f);
}

ColumnSolve solve_column(const EllipticOperator& L, int k) {
    const ScalarField rhs = divergence(L, corrected_flux(L, ScalarField(L.grid()), k));
    ColumnSolve out;
    try {
        out.chi = L.solve_poisson(rhs, &out.stats);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Solver) fail(ErrorKind::Solver, std::string("corrector solve diverged: ") + e.what());
        throw;
    }
    return out;
}

Mat2 homogenised_matrix(const EllipticOperator& L, const VectorField& chi) {
    Mat2 m;
    for (int k = 0; k < 2; ++k) {
        const VectorField flux = corrected_flux(L, chi.component(k), k);
        const double f0 = mean(flux.component(0));
        const double f1 = mean(flux.component(1));
        if (k == 0) {
            m.a11 = f0;
            m.a21 = f1;
        } else {
            m.a12 = f0;
            m.a22 = f1;
        }
    }
    return m;
}

double divergence_residual(const EllipticOperator& L, const VectorField& chi) {
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) worst = std::max(worst, sup_norm(divergence(L, corrected_flux(L, chi.component(k), k))));
    return worst;
}

}  // namespace

CorrectorPack solve_corrector(const CoefficientSpec& spec, int cell_n, double tol, Backend backend) {
    require(tol > 0.0, "tolerance must be positive");
    CorrectorPack p;
    p.spec = spec;
    p.cell = make_cell_grid(cell_n);
    p.a = sample_coefficient(spec, p.cell, 1);
    p.tol = tol;
    SolverOptions opts;
    opts.tol = tol;
    p.backend = backend;
    const EllipticOperator L(p.a, opts, backend);
    const EllipticOperator Ls = L.adjoint();
    p.chi = VectorField(p.cell);
    p.chi_star = VectorField(p.cell);
    for (int k = 0; k < 2; ++k) {
        ColumnSolve c = solve_column(L, k);
        p.chi.set_component(k, c.chi);
        p.solver_residual[k] = c.stats.relative_residual;
        p.iterations[k] = c.stats.iterations;
        if (p.a.symmetric) {
            p.chi_star.set_component(k, c.chi);
            p.solver_residual_star[k] = c.stats.relative_residual;
        } else {
            ColumnSolve s = solve_column(Ls, k);
            p.chi_star.set_component(k, s.chi);
            p.solver_residual_star[k] = s.stats.relative_residual;
        }
    }
    p.abar = homogenised_matrix(L, p.chi);
    p.abar_star = homogenised_matrix(Ls, p.chi_star);
    p.a0 = discrete_mean(p.a);
    p.max_divergence = std::max(divergence_residual(L, p.chi), divergence_residual(Ls, p.chi_star));
    return p;
}

ScalarField tile(const ScalarField& cell, const TorusGrid& grid, int N) {
    const int m = cell.grid.n();
    if (N < 1 || static_cast<long>(m) * N != grid.n())
        fail(ErrorKind::InvalidArgument, "resolution mismatch: cell grid " + std::to_string(m) + " x N = " +
                                             std::to_string(N) + " does not match grid " + std::to_string(grid.n()));
    ScalarField f(grid);
    for (int i = 0; i < grid.n(); ++i)
        for (int j = 0; j < grid.n(); ++j) f.v[grid.index(i, j)] = cell.v[cell.grid.index(i % m, j % m)];
    return f;
}

namespace {

MatrixField phi_from(const VectorField& chi, const TorusGrid& grid, int N) {
    MatrixField phi(grid);
    for (int k = 0; k < 2; ++k) {
        const VectorField d = fd_gradient(chi.component(k));
        for (int i = 0; i < 2; ++i) {
            ScalarField t = tile(d.component(i), grid, N);
            if (i == k)
                for (auto& x : t.v) x += 1.0;
            phi.c[2 * i + k] = std::move(t.v);
        }
    }
    return phi;
}

}  // namespace

PhiFields phi_fields(const CorrectorPack& pack, int N, const TorusGrid& grid) {
    require(pack.backend == Backend::FiniteDifference, "phi_fields needs a finite-difference corrector");
    return {phi_from(pack.chi, grid, N), phi_from(pack.chi_star, grid, N)};
}

VectorField matrix_column(const MatrixField& m, int k) {
    VectorField v(m.grid);
    v.c[0] = m.c[k];
    v.c[1] = m.c[2 + k];
    return v;
}

double check_flux_divfree(const CoefficientField& a_eps, const MatrixField& phi) {
    check_same_grid(a_eps.grid, phi.grid, "check_flux_divfree");
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) worst = std::max(worst, sup_norm(fd_divergence(apply_flux(a_eps, matrix_column(phi, k)))));
    return worst;
}

VectorField scaled_corrector(const CorrectorPack& pack, int N, const TorusGrid& grid, bool star) {
    const VectorField& chi = star ? pack.chi_star : pack.chi;
    VectorField out(grid);
    for (int k = 0; k < 2; ++k) out.set_component(k, (1.0 / N) * tile(chi.component(k), grid, N));
    return out;
}

Mat2 harmonic_mean(const CoefficientField& a) {
    double s11 = 0, s12 = 0, s21 = 0, s22 = 0;
    const std::size_t m = a.grid.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double a11 = a.node.c[0][i], a12 = a.node.c[1][i], a21 = a.node.c[2][i], a22 = a.node.c[3][i];
        const double det = a11 * a22 - a12 * a21;
        s11 += a22 / det;
        s12 += -a12 / det;
        s21 += -a21 / det;
        s22 += a11 / det;
    }
    s11 /= m, s12 /= m, s21 /= m, s22 /= m;
    const double det = s11 * s22 - s12 * s21;
    return {s22 / det, -s12 / det, -s21 / det, s11 / det};
}

OscillationReport oscillation_pairing(const ScalarField& f_cell, const ScalarField& phi, const std::vector<int>& Ns,
                                      double theta) {
    require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    if (std::abs(mean(f_cell)) > 1e-10) fail(ErrorKind::InvalidArgument, "oscillating factor must have mean zero");
    const Spectrum fs = fourier_transform(f_cell);
    double fmax = 0.0;
    for (const auto& c : fs.c) fmax = std::max(fmax, std::abs(c));
    struct Mode {
        int k1, k2;
        std::complex<double> c;
    };
    std::vector<Mode> modes;
    for (int r = 0; r < fs.n(); ++r)
        for (int col = 0; col < fs.cols(); ++col)
            if (std::abs(fs.at(r, col)) > 1e-14 * fmax) {
                const double mult = fs.multiplicity(col);
                modes.push_back({fs.k1(r), fs.k2(col), mult * fs.at(r, col)});
            }

    double l1 = 0.0;
    for (double x : f_cell.v) l1 += std::abs(x);
    l1 /= static_cast<double>(f_cell.v.size());
    const double phi_norm = holder_value(phi, theta);

    OscillationReport rep;
    rep.theta = theta;
    const TorusGrid& g = phi.grid;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int N : Ns) {
        require(N >= 1, "N must be positive");
        double pairing = 0.0;
        for (int i = 0; i < g.n(); ++i)
            for (int j = 0; j < g.n(); ++j) {
                const double x1 = N * i * g.h(), x2 = N * j * g.h();
                double f = 0.0;
                // real part of the half-plane sum; columns with multiplicity 2 stand for conjugate pairs
                for (const auto& m : modes) f += (m.c * std::polar(1.0, two_pi * (m.k1 * x1 + m.k2 * x2))).real();
                pairing += f * phi.v[g.index(i, j)];
            }
        pairing *= g.h() * g.h();
        OscillationEntry e;
        e.N = N;
        e.pairing = pairing;
        e.bound = std::pow(1.0 / N, theta) * l1 * phi_norm;
        e.ratio = e.bound > 0.0 ? std::abs(pairing) / e.bound : 0.0;
        rep.constant = std::max(rep.constant, e.ratio);
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace homlab
