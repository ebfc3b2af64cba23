#include "parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calculus.hpp"

namespace homlab {

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), M(steps) {
    if (!(horizon > 0.0)) fail(ErrorKind::InvalidArgument, "time horizon must be positive");
    if (steps < 1) fail(ErrorKind::InvalidArgument, "time grid needs at least one step");
}

std::vector<double> TimeGrid::stamps() const {
    std::vector<double> s(M + 1);
    for (int m = 0; m <= M; ++m) s[m] = t(m);
    return s;
}

namespace {

ScalarField step(const EllipticOperator& L, const ScalarField& u, const ScalarField* force, double dt, Scheme scheme) {
    ScalarField rhs = u;
    if (scheme == Scheme::CrankNicolson) {
        const ScalarField lu = L.apply(u);
        for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] += 0.5 * dt * lu.v[i];
    }
    if (force)
        for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] += dt * force->v[i];
    return L.solve_shifted(rhs, scheme == Scheme::CrankNicolson ? 0.5 * dt : dt, &u);
}

}  // namespace

ScalarField heat_semigroup(const EllipticOperator& L, const ScalarField& f0, double t, double dt) {
    require(t >= 0.0 && dt > 0.0, "heat_semigroup needs t >= 0 and dt > 0");
    const double steps = std::ceil(t / dt - 1e-9);
    if (steps > 1e7) fail(ErrorKind::InvalidArgument, "step-count overflow: t/dt = " + std::to_string(t / dt));
    ScalarField u = f0;
    const int m = static_cast<int>(steps);
    for (int k = 0; k < m; ++k) u = step(L, u, nullptr, t / m, Scheme::ImplicitEuler);
    return u;
}

ScalarHistory heat_history(const EllipticOperator& L, const ScalarField& f0, const TimeGrid& tg, const StepOptions& opt) {
    return solve_inhomogeneous(L, Forcing{}, f0, tg, opt);
}

ScalarHistory solve_inhomogeneous(const EllipticOperator& L, const Forcing& forcing, const ScalarField& u0,
                                  const TimeGrid& tg, const StepOptions& opt) {
    check_same_grid(L.grid(), u0.grid, "solve_inhomogeneous");
    ScalarHistory h;
    h.times = tg.stamps();
    h.frames.reserve(tg.M + 1);
    h.frames.push_back(u0);
    for (int m = 0; m < tg.M; ++m) {
        ScalarField f;
        if (forcing) {
            if (opt.scheme == Scheme::CrankNicolson)
                f = 0.5 * (forcing(m) + forcing(m + 1));
            else
                f = forcing(opt.forcing == ForcingAt::New ? m + 1 : m);
        }
        h.frames.push_back(step(L, h.frames.back(), forcing ? &f : nullptr, tg.dt(), opt.scheme));
    }
    return h;
}

ScalarHistory solve_inhomogeneous(const EllipticOperator& L, const ScalarHistory& forcing, const ScalarField& u0,
                                  const TimeGrid& tg, const StepOptions& opt) {
    if (forcing.size() != static_cast<std::size_t>(tg.M + 1))
        fail(ErrorKind::InvalidArgument, "forcing frames do not align with the time grid");
    for (int m = 0; m <= tg.M; ++m)
        if (std::abs(forcing.times[m] - tg.t(m)) > 1e-12 * tg.T)
            fail(ErrorKind::InvalidArgument, "forcing frames do not align with the time grid");
    return solve_inhomogeneous(L, [&](int m) { return forcing.frames[m]; }, u0, tg, opt);
}

ScalarHistory linear_solution_Y(const EllipticOperator& L, const ScalarField& eta, const TimeGrid& tg,
                                const StepOptions& opt) {
    return solve_inhomogeneous(L, [&](int) { return eta; }, ScalarField(eta.grid), tg, opt);
}

ScalarField stationary_X(const EllipticOperator& L, const ScalarField& eta) { return L.solve_poisson(remove_mean(eta)); }

ScalarHistory D_field(const ScalarHistory& Y, const ScalarField& X) {
    ScalarHistory d;
    d.times = Y.times;
    for (const auto& f : Y.frames) d.frames.push_back(f - X);
    return d;
}

VectorHistory flux_fields(const CoefficientField& a, const ScalarHistory& Y, FluxVariant variant, const ScalarField* X) {
    if (variant == FluxVariant::FD && X == nullptr) fail(ErrorKind::InvalidArgument, "F^D needs the stationary field X");
    const CoefficientField at = variant == FluxVariant::FStar ? a.transpose() : CoefficientField{};
    const CoefficientField& use = variant == FluxVariant::FStar ? at : a;
    VectorHistory out;
    out.times = Y.times;
    out.frames.reserve(Y.size());
    for (const auto& y : Y.frames) out.frames.push_back(apply_flux(use, fd_gradient(variant == FluxVariant::FD ? y - *X : y)));
    return out;
}

VectorHistory I_div_a(const EllipticOperator& L, const TimeGrid& tg, const StepOptions& opt) {
    const VectorField div = divergence_of_coefficient(L.coefficient());
    const ScalarHistory c0 = linear_solution_Y(L, div.component(0), tg, opt);
    const ScalarHistory c1 = linear_solution_Y(L, div.component(1), tg, opt);
    VectorHistory out;
    out.times = c0.times;
    for (std::size_t m = 0; m < c0.size(); ++m) {
        VectorField v(L.grid());
        v.set_component(0, c0.frames[m]);
        v.set_component(1, c1.frames[m]);
        out.frames.push_back(std::move(v));
    }
    return out;
}

GField G_field(const EllipticOperator& L, const CorrectorPack& pack, int N, const TimeGrid& tg, int steps_per_decade) {
    const TorusGrid& g = L.grid();
    const double eps = 1.0 / N;
    const VectorField chi_eps = scaled_corrector(pack, N, g);

    GField out;
    out.report.N = N;
    out.report.eps = eps;
    auto observe = [&](const std::array<ScalarField, 2>& G, double t) {
        double sup = 0.0, grad = 0.0;
        for (const auto& c : G) {
            sup = std::max(sup, sup_norm(c));
            grad = std::max(grad, sup_norm(fd_gradient(c)));
        }
        out.report.sup_ratio = std::max(out.report.sup_ratio, sup / eps);
        const double gr = std::sqrt(t) * grad / eps;
        if (gr > out.report.grad_ratio) {
            out.report.grad_ratio = gr;
            out.report.t_grad_sup = t;
        }
    };
    auto evolve = [&](const std::vector<double>& times, auto&& visit) {
        std::array<ScalarField, 2> G{-1.0 * chi_eps.component(0), -1.0 * chi_eps.component(1)};
        visit(G, 0);
        for (std::size_t s = 1; s < times.size(); ++s) {
            for (auto& c : G) c = step(L, c, nullptr, times[s] - times[s - 1], Scheme::ImplicitEuler);
            visit(G, s);
        }
    };

    // Output frames use the uniform steps, so I(div a) - eps chi reproduces them exactly.
    out.G.times = tg.stamps();
    evolve(out.G.times, [&](const std::array<ScalarField, 2>& G, std::size_t s) {
        VectorField v(g);
        v.set_component(0, G[0]);
        v.set_component(1, G[1]);
        out.G.frames.push_back(std::move(v));
        observe(G, out.G.times[s]);
    });

    // grad G varies on the scale eps^2, which the uniform grid may not resolve
    std::vector<double> fine = tg.stamps();
    const double t0 = 1e-3 * eps * eps;
    for (double t = t0; t < tg.T; t *= std::pow(10.0, 1.0 / steps_per_decade)) fine.push_back(t);
    std::sort(fine.begin(), fine.end());
    fine.erase(std::unique(fine.begin(), fine.end(), [&](double a, double b) { return b - a < 1e-12 * tg.T; }),
               fine.end());
    out.report.probe_steps = fine.size();
    evolve(fine, [&](const std::array<ScalarField, 2>& G, std::size_t s) { observe(G, fine[s]); });
    return out;
}

double torus_heat_kernel(const Mat2& abar, double t, double x1, double x2) {
    require(t > 0.0, "kernel time must be positive");
    // only the symmetric part enters the kernel
    const Mat2 s{abar.a11, 0.5 * (abar.a12 + abar.a21), 0.5 * (abar.a12 + abar.a21), abar.a22};
    const double det = s.a11 * s.a22 - s.a12 * s.a21;
    const Mat2 inv{s.a22 / det, -s.a12 / det, -s.a21 / det, s.a11 / det};
    double q = 0.0;
    for (int m1 = -5; m1 <= 5; ++m1)
        for (int m2 = -5; m2 <= 5; ++m2) {
            const double y1 = x1 - m1, y2 = x2 - m2;
            q += std::exp(-inv.quad(y1, y2) / (4.0 * t));
        }
    return q / (4.0 * std::numbers::pi * t * std::sqrt(det));
}

namespace {

ScalarField make_source(const TorusGrid& g, int y1, int y2, const ProbeOptions& opt) {
    ScalarField s(g);
    if (opt.source == SourceKind::GridDelta) {
        s(y1, y2) = 1.0 / (g.h() * g.h());
        return s;
    }
    if (opt.width < g.h()) fail(ErrorKind::InvalidArgument, "unresolved source: Gaussian width below grid spacing");
    double total = 0.0;
    for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j) {
            double v = 0.0;
            for (int m1 = -1; m1 <= 1; ++m1)
                for (int m2 = -1; m2 <= 1; ++m2) {
                    const double d1 = (i - y1) * g.h() - m1, d2 = (j - y2) * g.h() - m2;
                    v += std::exp(-(d1 * d1 + d2 * d2) / (2.0 * opt.width * opt.width));
                }
            s(i, j) = v;
            total += v * g.h() * g.h();
        }
    for (double& x : s.v) x /= total;
    return s;
}

// Evolves a source through the probe times; both kernels use the same steps.
std::vector<ScalarField> probe_columns(const EllipticOperator& L, const ScalarField& src,
                                       const std::vector<double>& times, double dt) {
    std::vector<ScalarField> out;
    ScalarField u = src;
    double now = 0.0;
    for (double t : times) {
        const int m = static_cast<int>(std::ceil((t - now) / dt - 1e-9));
        for (int k = 0; k < m; ++k) u = step(L, u, nullptr, (t - now) / m, Scheme::ImplicitEuler);
        now = t;
        out.push_back(u);
    }
    return out;
}

ScalarField shift_field(const ScalarField& f, int s1, int s2) {
    ScalarField r(f.grid);
    for (int i = 0; i < f.grid.n(); ++i)
        for (int j = 0; j < f.grid.n(); ++j) r(i + s1, j + s2) = f(i, j);
    return r;
}

VectorField node_gradient(const ScalarField& f) { return edge_to_node(fd_gradient(f)); }

MatrixField node_phi(const MatrixField& phi) {
    MatrixField out(phi.grid);
    for (int k = 0; k < 2; ++k) {
        const VectorField col = edge_to_node(matrix_column(phi, k));
        out.c[k] = col.c[0];
        out.c[2 + k] = col.c[1];
    }
    return out;
}

}  // namespace

KernelProbe green_probe(const EllipticOperator& L, const EllipticOperator& L0, const CorrectorPack& pack, int N,
                        int y1, int y2, const std::vector<double>& times, const ProbeOptions& opt) {
    const TorusGrid& g = L.grid();
    check_same_grid(g, L0.grid(), "green_probe");
    require(!times.empty() && std::is_sorted(times.begin(), times.end()), "probe times must be sorted");
    if (times.front() < opt.min_steps * opt.dt * (1.0 - 1e-12))
        fail(ErrorKind::InvalidArgument, "probe times must be at least 4 dt");
    const double eps = 1.0 / N;
    const PhiFields phi = phi_fields(pack, N, g);
    const MatrixField phi_node = node_phi(phi.phi);

    const ScalarField src = make_source(g, y1, y2, opt);
    const auto Q = probe_columns(L, src, times, opt.dt);
    const auto Q0 = probe_columns(L0, src, times, opt.dt);
    std::array<std::vector<ScalarField>, 2> Qy;
    if (opt.cross)
        for (int k = 0; k < 2; ++k) Qy[k] = probe_columns(L, shift_field(src, k == 0, k == 1), times, opt.dt);

    // Phi*(y) on the edges leaving the source node
    Mat2 ps{phi.phi_star.c[0][g.index(y1, y2)], phi.phi_star.c[1][g.index(y1, y2)], phi.phi_star.c[2][g.index(y1, y2)],
            phi.phi_star.c[3][g.index(y1, y2)]};

    KernelProbe probe;
    probe.N = N;
    probe.y1 = y1;
    probe.y2 = y2;
    for (std::size_t s = 0; s < times.size(); ++s) {
        KernelSlice sl;
        sl.t = times[s];
        sl.Q = Q[s];
        sl.Q0 = Q0[s];
        sl.mass = mean(Q[s]);
        sl.min_Q = *std::min_element(Q[s].v.begin(), Q[s].v.end());
        sl.max_diff = sup_norm(Q[s] - Q0[s]);

        const VectorField gq = node_gradient(Q[s]);
        const VectorField gq0 = node_gradient(Q0[s]);
        sl.R = gq - matvec(phi_node, gq0);
        sl.max_R = sup_norm(sl.R);

        if (opt.cross) {
            // d/dy_k of Q(x, y) and of Q0(x - y), differenced in the source location
            std::array<ScalarField, 2> dQ, dQ0;
            for (int k = 0; k < 2; ++k) {
                dQ[k] = static_cast<double>(g.n()) * (Qy[k][s] - Q[s]);
                dQ0[k] = static_cast<double>(g.n()) * (shift_field(Q0[s], k == 0, k == 1) - Q0[s]);
            }
            sl.Rstar = VectorField(g);
            for (int k = 0; k < 2; ++k) {
                const ScalarField corr = (k == 0 ? ps.a11 : ps.a21) * dQ0[0] + (k == 0 ? ps.a12 : ps.a22) * dQ0[1];
                sl.Rstar.set_component(k, dQ[k] - corr);
            }
            sl.max_Rstar = sup_norm(sl.Rstar);

            // R~_{ik} = d_{x_i} d_{y_k} Q - sum_{j,l} Phi_ij(x) d_{x_j} d_{y_l} Q0 Phi*_kl(y)
            std::array<VectorField, 2> hq, hq0;  // hq[k] = grad_x of dQ[k]
            for (int k = 0; k < 2; ++k) {
                hq[k] = node_gradient(dQ[k]);
                hq0[k] = node_gradient(dQ0[k]);
            }
            const double psm[2][2] = {{ps.a11, ps.a12}, {ps.a21, ps.a22}};
            sl.Rtilde = MatrixField(g);
            for (std::size_t p = 0; p < g.size(); ++p)
                for (int i = 0; i < 2; ++i)
                    for (int k = 0; k < 2; ++k) {
                        double corr = 0.0;
                        for (int j = 0; j < 2; ++j)
                            for (int l = 0; l < 2; ++l) corr += phi_node.c[2 * i + j][p] * hq0[l].c[j][p] * psm[k][l];
                        sl.Rtilde.c[2 * i + k][p] = hq[k].c[i][p] - corr;
                    }
            sl.max_Rtilde = sup_norm(sl.Rtilde);
        }
        const double lg = std::log(2.0 + std::sqrt(sl.t) / eps);
        sl.diff_envelope = sl.max_diff / (eps * std::pow(sl.t, -1.5));
        sl.R_envelope = sl.max_R / (eps * std::pow(sl.t, -2.0) * lg);
        sl.Rtilde_envelope = opt.cross ? sl.max_Rtilde / (eps * std::pow(sl.t, -2.5) * lg) : 0.0;
        probe.slices.push_back(std::move(sl));
    }
    return probe;
}

}  // namespace homlab
