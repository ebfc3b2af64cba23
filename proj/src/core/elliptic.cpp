#include "elliptic.hpp"

#include "calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace homlab {

namespace {

double dot_raw(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_raw(const std::vector<double>& a) { return std::sqrt(dot_raw(a, a)); }

// y += s x
void axpy(double s, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

void project_mean_zero(ScalarField& f) {
    const double m = mean(f);
    for (double& x : f.v) x -= m;
}

ScalarField spectral_elliptic(const MatrixField& a, const ScalarField& u) {
    const VectorField g = spectral_gradient(u);
    VectorField flux(u.grid);
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        flux.c[0][i] = a.c[0][i] * g.c[0][i] + a.c[1][i] * g.c[1][i];
        flux.c[1][i] = a.c[2][i] * g.c[0][i] + a.c[3][i] * g.c[1][i];
    }
    return spectral_divergence(flux);
}

Mat2 node_mean(const MatrixField& a) {
    return {mean(a.entry(0, 0)), mean(a.entry(0, 1)), mean(a.entry(1, 0)), mean(a.entry(1, 1))};
}

}  // namespace

EllipticOperator::EllipticOperator(CoefficientField a, SolverOptions opts, Backend backend)
    : a_(std::move(a)), opts_(opts), backend_(backend) {
    Mat2 c = a_.constant_value;
    if (!a_.constant) c = backend_ == Backend::Spectral ? node_mean(a_.node) : discrete_mean(a_);
    symbol_ = symbol_of(a_.grid, c, backend_);
}

std::vector<std::complex<double>> EllipticOperator::symbol_of(const TorusGrid& g, const Mat2& a, Backend backend) {
    ScalarField delta(g);
    delta.v[0] = 1.0;
    // symbol_of is also used for the mean of a nonsymmetric or indefinite-looking
    // sample, so build the field directly instead of through the elliptic check.
    CoefficientField c;
    c.grid = g;
    c.node = constant_matrix(g, a);
    c.xedge = c.node;
    c.yedge = c.node;
    c.diagonal = a.a12 == 0.0 && a.a21 == 0.0;
    c.constant = true;
    c.constant_value = a;
    const Spectrum s = fourier_transform(backend == Backend::Spectral ? spectral_elliptic(c.node, delta)
                                                                     : apply_elliptic(c, delta));
    const double inv_h2 = 1.0 / (g.h() * g.h());
    std::vector<std::complex<double>> sym(s.c.size());
    double top = 0.0;
    for (std::size_t i = 0; i < sym.size(); ++i) {
        sym[i] = -s.c[i] * inv_h2;
        top = std::max(top, std::abs(sym[i]));
    }
    // the kernel (mean, and Nyquist modes for the spectral form) must be exactly zero
    for (auto& x : sym)
        if (std::abs(x) <= 1e-12 * top) x = 0.0;
    return sym;
}

ScalarField EllipticOperator::apply(const ScalarField& u) const {
    return backend_ == Backend::Spectral ? spectral_elliptic(a_.node, u) : apply_elliptic(a_, u);
}

EllipticOperator EllipticOperator::adjoint() const { return EllipticOperator(a_.transpose(), opts_, backend_); }

ScalarField EllipticOperator::apply_system(const ScalarField& u, double shift, double scale) const {
    ScalarField lu = apply(u);
    for (std::size_t i = 0; i < lu.v.size(); ++i) lu.v[i] = shift * u.v[i] - scale * lu.v[i];
    return lu;
}

ScalarField EllipticOperator::precondition(const ScalarField& r, double shift, double scale) const {
    Spectrum s = fourier_transform(r);
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        const std::complex<double> d = shift + scale * symbol_[i];
        s.c[i] = std::abs(d) > 0.0 ? s.c[i] / d : std::complex<double>(0.0, 0.0);
    }
    return inverse_fourier(s);
}

ScalarField EllipticOperator::solve_shifted(const ScalarField& b, double dt, const ScalarField* guess,
                                            SolveStats* stats) const {
    check_same_grid(a_.grid, b.grid, "solve_shifted");
    require(dt >= 0.0, "time step must be nonnegative");
    if (dt == 0.0) return b;
    if (a_.constant) {
        if (stats) *stats = {};
        return precondition(b, 1.0, dt);
    }
    return krylov(b, 1.0, dt, false, guess, stats);
}

ScalarField EllipticOperator::solve_poisson(const ScalarField& b, SolveStats* stats) const {
    check_same_grid(a_.grid, b.grid, "solve_poisson");
    ScalarField rhs = remove_mean(b);
    if (a_.constant) {
        if (stats) *stats = {};
        return precondition(rhs, 0.0, 1.0);
    }
    ScalarField u = krylov(rhs, 0.0, 1.0, true, nullptr, stats);
    project_mean_zero(u);
    return u;
}

ScalarField EllipticOperator::krylov(const ScalarField& b, double shift, double scale, bool project,
                                     const ScalarField* guess, SolveStats* stats) const {
    const double bnorm = norm_raw(b.v);
    ScalarField x = guess ? *guess : ScalarField(b.grid);
    if (project) project_mean_zero(x);
    if (bnorm == 0.0) {
        if (stats) *stats = {};
        return ScalarField(b.grid);
    }
    int total = 0;
    double rel = 0.0;
    // The recurrence residual drifts from the true one near rounding level, so
    // restart from the current iterate until the true residual meets tol.
    for (int cycle = 0; cycle < 4; ++cycle) {
        ScalarField r = b - apply_system(x, shift, scale);
        if (project) project_mean_zero(r);
        rel = norm_raw(r.v) / bnorm;
        if (rel <= opts_.tol || total >= opts_.max_iter) break;
        total += iterate(x, r, bnorm, shift, scale, project, opts_.max_iter - total);
    }
    ScalarField res = b - apply_system(x, shift, scale);
    if (project) project_mean_zero(res);
    rel = norm_raw(res.v) / bnorm;
    if (stats) *stats = {total, rel};
    if (!all_finite(x.v) || rel > opts_.tol)
    {
        char msg[128];
        std::snprintf(msg, sizeof msg, "linear solve did not converge: relative residual %.3e after %d iterations",
                      rel, total);
        fail(ErrorKind::Solver, msg);
    }
    return x;
}

int EllipticOperator::iterate(ScalarField& x, ScalarField r, double bnorm, double shift, double scale, bool project,
                              int budget) const {
    double rel = norm_raw(r.v) / bnorm;
    int it = 0;
    if (a_.symmetric) {
        ScalarField z = precondition(r, shift, scale);
        ScalarField p = z;
        double rz = dot_raw(r.v, z.v);
        while (rel > opts_.tol && it < budget) {
            const ScalarField ap = apply_system(p, shift, scale);
            const double alpha = rz / dot_raw(p.v, ap.v);
            axpy(alpha, p.v, x.v);
            axpy(-alpha, ap.v, r.v);
            if (project) project_mean_zero(r);
            rel = norm_raw(r.v) / bnorm;
            ++it;
            if (rel <= opts_.tol) break;
            z = precondition(r, shift, scale);
            const double rz_new = dot_raw(r.v, z.v);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = z.v[i] + beta * p.v[i];
        }
        return it;
    }
    // right-preconditioned BiCGStab
    const ScalarField r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    ScalarField v(r.grid), p(r.grid);
    while (rel > opts_.tol && it < budget) {
        const double rho_new = dot_raw(r0.v, r.v);
        if (rho_new == 0.0) break;
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = r.v[i] + beta * (p.v[i] - omega * v.v[i]);
        const ScalarField ph = precondition(p, shift, scale);
        v = apply_system(ph, shift, scale);
        if (project) project_mean_zero(v);
        alpha = rho / dot_raw(r0.v, v.v);
        ScalarField s = r;
        axpy(-alpha, v.v, s.v);
        ++it;
        if (norm_raw(s.v) / bnorm <= opts_.tol) {
            axpy(alpha, ph.v, x.v);
            break;
        }
        const ScalarField sh = precondition(s, shift, scale);
        ScalarField t = apply_system(sh, shift, scale);
        if (project) project_mean_zero(t);
        omega = dot_raw(t.v, s.v) / dot_raw(t.v, t.v);
        axpy(alpha, ph.v, x.v);
        axpy(omega, sh.v, x.v);
        r = s;
        axpy(-omega, t.v, r.v);
        rel = norm_raw(r.v) / bnorm;
        if (omega == 0.0) break;
    }
    return it;
}

}  // namespace homlab
