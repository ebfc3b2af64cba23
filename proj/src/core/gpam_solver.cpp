#include "gpam_solver.hpp"

#include <algorithm>
#include <cmath>

#include "calculus.hpp"

namespace homlab {

Nonlinearity Nonlinearity::make(NonlinearityKind kind, double c) {
    Nonlinearity g;
    g.kind = kind;
    g.c = c;
    const double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
        case NonlinearityKind::Sine: g.bounds = {1.0, 1.0, 1.0, 1.0}; break;
        case NonlinearityKind::Tanh: g.bounds = {1.0, 1.0, 4.0 / (3.0 * std::sqrt(3.0)), 2.0}; break;
        // g''' peaks at 4.66856 near |u| = 0.32
        case NonlinearityKind::Rational: g.bounds = {1.0, 9.0 / (8.0 * std::sqrt(3.0)), 2.0, 4.6686}; break;
        case NonlinearityKind::Constant: g.bounds = {std::abs(c), 0.0, 0.0, 0.0}; break;
        case NonlinearityKind::Linear: g.bounds = {inf, 1.0, 0.0, 0.0}; break;
    }
    return g;
}

Nonlinearity Nonlinearity::parse(const std::string& name, double c) {
    if (name == "sin") return make(NonlinearityKind::Sine);
    if (name == "tanh") return make(NonlinearityKind::Tanh);
    if (name == "rational") return make(NonlinearityKind::Rational);
    if (name == "const") return make(NonlinearityKind::Constant, c);
    if (name == "linear") return make(NonlinearityKind::Linear);
    fail(ErrorKind::InvalidArgument, "unknown nonlinearity: " + name);
}

std::string Nonlinearity::name() const {
    switch (kind) {
        case NonlinearityKind::Sine: return "sin";
        case NonlinearityKind::Tanh: return "tanh";
        case NonlinearityKind::Rational: return "rational";
        case NonlinearityKind::Constant: return "const";
        case NonlinearityKind::Linear: return "linear";
    }
    return "";
}

double Nonlinearity::g(double x) const { return derivative(0, x); }
double Nonlinearity::d1(double x) const { return derivative(1, x); }
double Nonlinearity::d2(double x) const { return derivative(2, x); }
double Nonlinearity::d3(double x) const { return derivative(3, x); }

double Nonlinearity::derivative(int j, double x) const {
    switch (kind) {
        case NonlinearityKind::Sine: {
            const double s = std::sin(x), co = std::cos(x);
            const double v[4] = {s, co, -s, -co};
            return v[j];
        }
        case NonlinearityKind::Tanh: {
            const double t = std::tanh(x), s = 1.0 - t * t;
            const double v[4] = {t, s, -2.0 * t * s, -2.0 * s * (s - 2.0 * t * t)};
            return v[j];
        }
        case NonlinearityKind::Rational: {
            const double q = 1.0 + x * x;
            const double v[4] = {1.0 / q, -2.0 * x / (q * q), (6.0 * x * x - 2.0) / (q * q * q),
                                 24.0 * x * (1.0 - x * x) / (q * q * q * q)};
            return v[j];
        }
        case NonlinearityKind::Constant: return j == 0 ? c : 0.0;
        case NonlinearityKind::Linear: return j == 0 ? x : (j == 1 ? 1.0 : 0.0);
    }
    return 0.0;
}

ScalarField apply(const Nonlinearity& g, int j, const ScalarField& u) {
    ScalarField out(u.grid);
    for (std::size_t p = 0; p < u.v.size(); ++p) out.v[p] = g.derivative(j, u.v[p]);
    return out;
}

VectorField Calculus::grad(const ScalarField& f) const {
    return L->backend() == Backend::Spectral ? spectral_gradient(f) : fd_gradient(f);
}

VectorField Calculus::flux(const VectorField& v, bool transpose) const {
    const CoefficientField& a = L->coefficient();
    if (L->backend() == Backend::Spectral) return transpose ? matTvec(a.node, v) : matvec(a.node, v);
    return transpose ? apply_flux(a.transpose(), v) : apply_flux(a, v);
}

ScalarField Calculus::div(const VectorField& v) const {
    return L->backend() == Backend::Spectral ? spectral_divergence(v) : fd_divergence(v);
}

GpamSolution solve_gpam(const EllipticOperator& L, const Nonlinearity& g, const ScalarField& eta, const ScalarHistory* C,
                        const ScalarField& u0, const TimeGrid& tg, const GpamOptions& opt) {
    check_same_grid(L.grid(), eta.grid, "solve_gpam");
    check_same_grid(L.grid(), u0.grid, "solve_gpam");
    if (!all_finite(u0.v) || !all_finite(eta.v)) fail(ErrorKind::InvalidArgument, "non-finite initial data or noise");
    if (C != nullptr && C->size() != static_cast<std::size_t>(tg.M + 1))
        fail(ErrorKind::InvalidArgument, "renormalisation frames do not align with the time grid");
    if (!(opt.guard > 0.0)) fail(ErrorKind::InvalidArgument, "blow-up guard must be positive");

    GpamSolution sol;
    sol.u.times.push_back(0.0);
    sol.u.frames.push_back(u0);
    const double dt = tg.dt();
    for (int m = 0; m < tg.M; ++m) {
        const ScalarField& u = sol.u.frames.back();
        const ScalarField* cm = C != nullptr ? &C->frames[m] : nullptr;
        const double cbar = (cm != nullptr && opt.average_renorm) ? mean(*cm) : 0.0;
        ScalarField rhs = u;
        for (std::size_t p = 0; p < u.v.size(); ++p) {
            const double c = cm == nullptr ? 0.0 : (opt.average_renorm ? cbar : cm->v[p]);
            rhs.v[p] += dt * g.g(u.v[p]) * (eta.v[p] - c * g.d1(u.v[p]));
        }
        ScalarField next = L.solve_shifted(rhs, dt, &u);
        if (!all_finite(next.v) || sup_norm(next) > opt.guard) {
            sol.blowup = true;
            sol.blowup_time = tg.t(m + 1);
            break;
        }
        sol.u.times.push_back(tg.t(m + 1));
        sol.u.frames.push_back(std::move(next));
        sol.last_valid = m + 1;
    }
    return sol;
}

GpamSolution solve_homogenised(const Mat2& abar, const Nonlinearity& g, const ScalarField& eta, const ScalarHistory* C0,
                               const ScalarField& u0, const TimeGrid& tg, const GpamOptions& opt) {
    const EllipticOperator L0(constant_coefficient(eta.grid, abar));
    return solve_gpam(L0, g, eta, C0, u0, tg, opt);
}

ScalarField default_initial_data(const TorusGrid& g) {
    ScalarField u(g);
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
            u(i, j) = std::cos(2.0 * M_PI * node_x(g, i)) + 0.5 * std::sin(2.0 * M_PI * node_x(g, j));
    return u;
}

ScalarHistory u_sharp(const ScalarHistory& u, const Nonlinearity& g, const ScalarHistory& Y) {
    if (Y.size() < u.size()) fail(ErrorKind::InvalidArgument, "Y history shorter than the solution");
    ScalarHistory out;
    out.times = u.times;
    for (std::size_t m = 0; m < u.size(); ++m) out.frames.push_back(u.frames[m] - para_lt(apply(g, 0, u.frames[m]), Y.frames[m]));
    return out;
}

AnsatzContext make_ansatz_context(const EllipticOperator& L, const Nonlinearity& g, const ScalarField& eta,
                                  const ScalarHistory* C, const TimeGrid& tg, bool average_renorm) {
    AnsatzContext ctx;
    ctx.L = L;
    ctx.g = g;
    ctx.eta = eta;
    ctx.Y = linear_solution_Y(L, eta, tg);
    ctx.X = stationary_X(L, eta);
    ctx.eta0 = mean(eta);
    ctx.average_renorm = average_renorm;
    if (C != nullptr) {
        if (C->size() != ctx.Y.size()) fail(ErrorKind::InvalidArgument, "renormalisation frames do not align with the time grid");
        ctx.C = *C;
    } else {
        ctx.C.times = ctx.Y.times;
        ctx.C.frames.assign(ctx.Y.size(), ScalarField(eta.grid));
    }
    return ctx;
}

FunctionalBundle functionals(const AnsatzContext& ctx, const ScalarField& u, std::size_t m) {
    if (m >= ctx.Y.size()) fail(ErrorKind::InvalidArgument, "frame index beyond the time grid");
    const Calculus d(ctx.L);
    const TorusGrid& grid = u.grid;
    const ScalarField& Y = ctx.Y.frames[m];
    const ScalarField C = ctx.average_renorm ? ScalarField(grid, mean(ctx.C.frames[m])) : ctx.C.frames[m];

    const ScalarField gu = apply(ctx.g, 0, u);
    const ScalarField g1 = apply(ctx.g, 1, u);
    const ScalarField g2 = apply(ctx.g, 2, u);
    const VectorField gradY = d.grad(Y);
    const VectorField gradu = d.grad(u);

    FunctionalBundle b;
    b.Lambda = para_lt(d.grad(gu), Y) - para_ge(gu, gradY);
    b.A = gradu - gu * gradY;
    b.u_sharp = u - para_lt(gu, Y);
    b.grad_u_sharp = d.grad(b.u_sharp);
    b.F = d.flux(gradY);
    b.FD = d.flux(d.grad(Y - ctx.X));
    b.wick = dot(gradY, b.F) - C;
    b.S = g1 * dot(b.A, b.F) + (g1 * gu) * b.wick;

    // T1 stands for g >= dY/dt, T2 for d g(u)/dt
    const VectorField gradu_full = b.A + gu * gradY;
    const VectorField gradg = d.grad(gu);
    ScalarField low(grid);
    for (int k = 0; k < 2; ++k) low = low + para_lt(gradg.component(k), b.FD.component(k));
    b.T1 = d.div(para_ge(gu, b.FD)) + para_ge(gu, ScalarField(grid, ctx.eta0)) + low - g1 * dot(gradu_full, b.FD);

    const VectorField V = d.flux(b.A) + gu * b.FD;
    b.T2 = d.div(g1 * V) + ctx.eta0 * (g1 * gu) - g2 * dot(gradu_full, V) +
           (g1 * g1) * (dot(b.A, b.F - b.FD) + gu * (b.wick - dot(gradY, b.FD)));
    b.T = b.T1 - para_lt(b.T2, Y);
    b.div_a_Lambda = d.div(d.flux(b.Lambda));
    return b;
}

VectorHistory lambda_history(const AnsatzContext& ctx, const GpamSolution& sol) {
    const Calculus d(ctx.L);
    VectorHistory out;
    out.times = sol.u.times;
    for (std::size_t m = 0; m < sol.u.size(); ++m) {
        const ScalarField gu = apply(ctx.g, 0, sol.u.frames[m]);
        out.frames.push_back(para_lt(d.grad(gu), ctx.Y.frames[m]) - para_ge(gu, d.grad(ctx.Y.frames[m])));
    }
    return out;
}

namespace {

VectorField plus_matvec(const MatrixField& M, const VectorField& x) { return x + matvec(M, x); }

VectorField low_pass(const VectorField& v) {
    const int J = dyadic_partition(v.grid).max_block();
    VectorField out(v.grid);
    for (int k = 0; k < 2; ++k) {
        const auto blocks = lp_blocks(v.component(k));
        ScalarField s(v.grid);
        for (int j = -1; j <= J / 2; ++j) s = s + blocks[j + 1];
        out.set_component(k, s);
    }
    return out;
}

VectorField solve_pointwise(const MatrixField& m, const VectorField& r) {
    VectorField out(r.grid);
    for (std::size_t p = 0; p < r.grid.size(); ++p) {
        const double a = m.c[0][p], b = m.c[1][p], c = m.c[2][p], d = m.c[3][p];
        const double det = a * d - b * c;
        if (std::abs(det) < 1e-14) fail(ErrorKind::Solver, "singular corrector matrix");
        out.c[0][p] = (d * r.c[0][p] - b * r.c[1][p]) / det;
        out.c[1][p] = (-c * r.c[0][p] + a * r.c[1][p]) / det;
    }
    return out;
}

}  // namespace

VectorField A_from_triple(const MatrixField& phi, const VectorField& v, const VectorField& w, const MatrixField& M,
                          const VectorField& Lambda, const VectorField& grad_heat_u0) {
    return matvec(phi, v) + w + plus_matvec(M, Lambda) + grad_heat_u0;
}

TripleSplit split_triple(const MatrixField& phi, const VectorField& A, const MatrixField& M, const VectorField& Lambda,
                         const VectorField& grad_heat_u0) {
    const VectorField r = A - plus_matvec(M, Lambda) - grad_heat_u0;
    TripleSplit s;
    s.v = low_pass(solve_pointwise(phi, r));
    s.w = r - matvec(phi, s.v);
    return s;
}

ScalarField flux_expansion(const MatrixField& phi, const VectorField& v, const VectorField& w, const MatrixField& M,
                           const VectorField& Lambda, const VectorField& grad_heat0_u0, const VectorField& Rterm,
                           const VectorField& F) {
    return dot(v + grad_heat0_u0, matTvec(phi, F)) + dot(w, F) + dot(F + matTvec(M, F), Lambda) + dot(Rterm, F);
}

AnsatzResidual ansatz_residual(const AnsatzContext& ctx, const GpamSolution& sol, const ScalarField& u0,
                               const TimeGrid& tg, double alpha) {
    if (sol.last_valid < 1) fail(ErrorKind::InvalidArgument, "solution has no valid steps");
    const TimeGrid valid(tg.t(sol.last_valid), sol.last_valid);
    std::vector<ScalarField> sharp(sol.u.size());
    sharp[0] = functionals(ctx, sol.u.frames[0], 0).u_sharp;
    const Forcing forcing = [&](int m) {
        FunctionalBundle b = functionals(ctx, sol.u.frames[m], m);
        sharp[m] = std::move(b.u_sharp);
        return b.div_a_Lambda + b.T + b.S;
    };
    const ScalarHistory rhs = solve_inhomogeneous(ctx.L, forcing, u0, valid, {Scheme::ImplicitEuler, ForcingAt::New});

    AnsatzResidual out;
    out.residual.times = rhs.times;
    double sup = 0.0;
    for (std::size_t m = 0; m < rhs.size(); ++m) {
        out.residual.frames.push_back(sharp[m] - rhs.frames[m]);
        sup = std::max(sup, sup_norm(out.residual.frames.back()));
    }
    const int n = ctx.L.grid().n();
    out.sup = {"ansatz_u_sharp", "LinfLinf", sup, n, valid.M};
    out.holder = {"ansatz_u_sharp", "sup_t_C^" + std::to_string(alpha).substr(0, 4),
                  weighted_time_norm(out.residual, 0.0, SpatialNormKind::Holder, alpha).value, n, valid.M};
    return out;
}

TransformResidual hairer_labbe_check(const AnsatzContext& ctx, const GpamSolution& sol, const TimeGrid& tg) {
    if (ctx.g.kind != NonlinearityKind::Linear)
        fail(ErrorKind::InvalidArgument, "the exponential transform needs g(u) = u");
    if (sol.last_valid < 1) fail(ErrorKind::InvalidArgument, "solution has no valid steps");
    const Calculus d(ctx.L);
    const double dt = tg.dt();
    auto transformed = [&](std::size_t m) {
        ScalarField w = sol.u.frames[m];
        for (std::size_t p = 0; p < w.v.size(); ++p) w.v[p] *= std::exp(-ctx.Y.frames[m].v[p]);
        return w;
    };

    TransformResidual out;
    out.residual.times.push_back(0.0);
    out.residual.frames.emplace_back(ctx.L.grid());
    ScalarField prev = transformed(0);
    double sup = 0.0, hol = 0.0;
    for (std::size_t m = 1; m < sol.u.size(); ++m) {
        const ScalarField w = transformed(m);
        const ScalarField& Y = ctx.Y.frames[m];
        const ScalarField C = ctx.average_renorm ? ScalarField(w.grid, mean(ctx.C.frames[m])) : ctx.C.frames[m];
        const VectorField gradY = d.grad(Y);
        const VectorField gradw = d.grad(w);
        const ScalarField drift = dot(gradY, d.flux(gradw) + d.flux(gradw, true));
        const ScalarField potential = (dot(gradY, d.flux(gradY)) - C) * w;
        ScalarField r = (1.0 / dt) * (w - prev) - ctx.L.apply(w) - drift - potential;
        sup = std::max(sup, sup_norm(r));
        hol = std::max(hol, holder_value(r, -1.0));
        out.residual.times.push_back(sol.u.times[m]);
        out.residual.frames.push_back(std::move(r));
        prev = w;
    }
    const int n = ctx.L.grid().n();
    out.sup = {"exponential_transform", "LinfLinf", sup, n, sol.last_valid};
    out.holder = {"exponential_transform", "sup_t_C^-1", hol, n, sol.last_valid};
    return out;
}

RtildeReport rtilde_diagnostic(const EllipticOperator& L, const CorrectorPack& pack, int N, const VectorHistory& Lambda,
                               const TimeGrid& tg) {
    const TorusGrid& g = L.grid();
    if (g.n() > 32) fail(ErrorKind::InvalidArgument, "the R~ diagnostic is limited to n <= 32");
    if (Lambda.size() != static_cast<std::size_t>(tg.M + 1))
        fail(ErrorKind::InvalidArgument, "Lambda frames do not align with the time grid");
    const EllipticOperator L0(constant_coefficient(g, pack.abar), L.options());
    const MatrixField& a = L.coefficient().node;
    const int M = tg.M;
    std::vector<double> times;
    for (int m = 1; m <= M; ++m) times.push_back(tg.t(m));
    ProbeOptions opt;
    opt.dt = tg.dt();
    opt.min_steps = 1.0;

    // term[m] accumulates the vector field at t_m
    std::vector<VectorField> term(M + 1, VectorField(g));
    const double w = tg.dt() * g.h() * g.h();
    for (int y1 = 0; y1 < g.n(); ++y1)
        for (int y2 = 0; y2 < g.n(); ++y2) {
            const KernelProbe probe = green_probe(L, L0, pack, N, y1, y2, times, opt);
            const std::size_t q = g.index(y1, y2);
            for (int m = 1; m <= M; ++m)
                for (int r = 0; r < m; ++r) {
                    const MatrixField& Rt = probe.slices[m - r - 1].Rtilde;
                    for (std::size_t p = 0; p < g.size(); ++p) {
                        const double d0 = Lambda.frames[r].c[0][q] - Lambda.frames[m].c[0][p];
                        const double d1 = Lambda.frames[r].c[1][q] - Lambda.frames[m].c[1][p];
                        // a(y) (Lambda(r, y) - Lambda(t, x))
                        const double v0 = a.c[0][q] * d0 + a.c[1][q] * d1;
                        const double v1 = a.c[2][q] * d0 + a.c[3][q] * d1;
                        term[m].c[0][p] += w * (Rt.c[0][p] * v0 + Rt.c[1][p] * v1);
                        term[m].c[1][p] += w * (Rt.c[2][p] * v0 + Rt.c[3][p] * v1);
                    }
                }
        }
    RtildeReport rep;
    rep.N = N;
    rep.n = g.n();
    rep.M = M;
    for (int m = 0; m <= M; ++m) {
        rep.per_time.push_back(sup_norm(term[m]));
        rep.value = std::max(rep.value, rep.per_time.back());
    }
    return rep;
}

}  // namespace homlab
