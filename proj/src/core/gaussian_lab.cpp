#include "gaussian_lab.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <optional>
#include <random>

#include "calculus.hpp"
#include "fft.hpp"
#include "parallel.hpp"

namespace homlab {

namespace {

constexpr int kChunks = 8;

int wrap_mode(int k, int n) {
    k %= n;
    if (k <= -n / 2) k += n;
    if (k > n / 2) k -= n;
    return k;
}

double mollifier_weight(Mollifier m, double delta, int k1, int k2) {
    if (m == Mollifier::Sharp) {
        const int K = cutoff_modes(delta);
        return (std::abs(k1) <= K && std::abs(k2) <= K) ? 1.0 : 0.0;
    }
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return std::exp(-delta * delta * four_pi2 * (k1 * k1 + k2 * k2));
}

void add_into(ScalarField& acc, const ScalarField& f) {
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += f.v[i];
}

ScalarHistory zero_history(const TorusGrid& g, const TimeGrid& tg) {
    ScalarHistory h;
    h.times = tg.stamps();
    h.frames.assign(tg.M + 1, ScalarField(g));
    return h;
}

ScalarHistory target_of(const EllipticOperator& L, const ScalarHistory& Y, const ScalarField& eta,
                        const RenormOptions& opt) {
    return opt.target == RenormTarget::FluxD ? D_field(Y, stationary_X(L, eta)) : Y;
}

ScalarField density_for(const EllipticOperator& L, const ScalarHistory& Y, const ScalarHistory& Z, std::size_t m) {
    return flux_density(L, Y.frames[m], Z.frames[m]);
}

}  // namespace

std::uint64_t field_hash(const ScalarField& f) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto* p = reinterpret_cast<const unsigned char*>(f.v.data());
    for (std::size_t i = 0; i < f.v.size() * sizeof(double); ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

NoiseRealisation sample_white_noise(const TorusGrid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    NoiseRealisation r;
    r.seed = seed;
    r.field = ScalarField(g);
    const double inv_h = 1.0 / g.h();
    for (double& x : r.field.v) x = normal(rng) * inv_h;
    r.hash = field_hash(r.field);
    return r;
}

int cutoff_modes(double delta) {
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    return static_cast<int>(std::floor(1.0 / delta + 1e-12));
}

ScalarField regularise(const ScalarField& eta, double delta, Mollifier m) {
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    return apply_multiplier(eta, [&](int k1, int k2) { return mollifier_weight(m, delta, k1, k2); });
}

ScalarField flux_density(const EllipticOperator& L, const ScalarField& y, const ScalarField& z) {
    const CoefficientField& a = L.coefficient();
    ScalarField out(y.grid);
    if (L.backend() == Backend::Spectral) {
        const VectorField gy = spectral_gradient(y);
        const VectorField fz = matvec(a.node, spectral_gradient(z));
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = gy.c[0][i] * fz.c[0][i] + gy.c[1][i] * fz.c[1][i];
        return out;
    }
    const VectorField gy = fd_gradient(y);
    const VectorField fz = apply_flux(a, fd_gradient(z));
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = gy.c[0][i] * fz.c[0][i] + gy.c[1][i] * fz.c[1][i];
    return out;
}

ScalarHistory linear_solution_exact(const EllipticOperator& L, const ScalarField& eta, const TimeGrid& tg) {
    if (!L.constant()) fail(ErrorKind::InvalidArgument, "closed-form evolution needs a constant operator");
    const auto sym = EllipticOperator::symbol_of(L.grid(), L.coefficient().constant_value, L.backend());
    const Spectrum e = fourier_transform(eta);
    ScalarHistory y;
    y.times = tg.stamps();
    for (double t : y.times) {
        Spectrum s = e;
        for (std::size_t i = 0; i < s.c.size(); ++i) {
            const std::complex<double> sg = sym[i];
            s.c[i] *= std::abs(sg) == 0.0 ? std::complex<double>(t) : (1.0 - std::exp(-sg * t)) / sg;
        }
        y.frames.push_back(inverse_fourier(s));
    }
    return y;
}

RenormField renorm_field(const EllipticOperator& L, double delta, const TimeGrid& tg, const RenormOptions& opt) {
    const TorusGrid& g = L.grid();
    cutoff_modes(delta);
    RenormField r;
    r.delta = delta;
    r.options = opt;
    const std::size_t frames = tg.M + 1;

    if (opt.method == RenormMethod::ModeSum) {
        // real L^2-orthonormal basis of the retained modes, one entry per {k, -k}
        struct Basis {
            int k1, k2;
            bool sine;
            double weight;
        };
        std::vector<Basis> basis;
        const int n = g.n();
        for (int k1 = -n / 2 + 1; k1 <= n / 2; ++k1)
            for (int k2 = -n / 2 + 1; k2 <= n / 2; ++k2) {
                if (k1 == 0 && k2 == 0) continue;  // constants carry no gradient
                const double w = mollifier_weight(opt.mollifier, delta, k1, k2);
                if (w < 1e-300) continue;
                const int c1 = wrap_mode(-k1, n), c2 = wrap_mode(-k2, n);
                if (std::pair(k1, k2) > std::pair(c1, c2)) continue;
                basis.push_back({k1, k2, false, w});
                if (c1 != k1 || c2 != k2) basis.push_back({k1, k2, true, w});
            }
        r.modes = static_cast<int>(basis.size());
        std::vector<std::optional<ScalarHistory>> partial(kChunks);
        parallel_chunks(static_cast<int>(basis.size()), kChunks, [&](int chunk, int b, int e) {
            ScalarHistory acc = zero_history(g, tg);
            for (int i = b; i < e; ++i) {
                const Basis& bs = basis[i];
                ScalarField phi(g);
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y) {
                        const double arg = 2.0 * std::numbers::pi * (bs.k1 * x + bs.k2 * y) / n;
                        phi(x, y) = bs.sine ? std::sin(arg) : std::cos(arg);
                    }
                const double nrm = l2_norm(phi);
                for (double& v : phi.v) v *= bs.weight / nrm;
                const ScalarHistory Y = opt.exact_time ? linear_solution_exact(L, phi, tg) : linear_solution_Y(L, phi, tg);
                const ScalarHistory Z = target_of(L, Y, phi, opt);
                for (std::size_t m = 0; m < frames; ++m) add_into(acc.frames[m], density_for(L, Y, Z, m));
            }
            partial[chunk] = std::move(acc);
        });
        r.C = zero_history(g, tg);
        for (auto& p : partial)
            if (p)
                for (std::size_t m = 0; m < frames; ++m) add_into(r.C.frames[m], p->frames[m]);
    } else {
        if (opt.samples < 2) fail(ErrorKind::InvalidArgument, "Monte Carlo renormalisation needs at least 2 samples");
        struct Sums {
            ScalarHistory s, s2;
        };
        std::vector<std::optional<Sums>> partial(kChunks);
        parallel_chunks(opt.samples, kChunks, [&](int chunk, int b, int e) {
            Sums acc{zero_history(g, tg), zero_history(g, tg)};
            for (int s = b; s < e; ++s) {
                const ScalarField eta =
                    regularise(sample_white_noise(g, opt.seed + static_cast<std::uint64_t>(s)).field, delta, opt.mollifier);
                const ScalarHistory Y = opt.exact_time ? linear_solution_exact(L, eta, tg) : linear_solution_Y(L, eta, tg);
                const ScalarHistory Z = target_of(L, Y, eta, opt);
                for (std::size_t m = 0; m < frames; ++m) {
                    const ScalarField d = density_for(L, Y, Z, m);
                    for (std::size_t i = 0; i < d.v.size(); ++i) {
                        acc.s.frames[m].v[i] += d.v[i];
                        acc.s2.frames[m].v[i] += d.v[i] * d.v[i];
                    }
                }
            }
            partial[chunk] = std::move(acc);
        });
        ScalarHistory s = zero_history(g, tg), s2 = zero_history(g, tg);
        for (auto& p : partial)
            if (p)
                for (std::size_t m = 0; m < frames; ++m) {
                    add_into(s.frames[m], p->s.frames[m]);
                    add_into(s2.frames[m], p->s2.frames[m]);
                }
        const double cnt = opt.samples;
        r.C = zero_history(g, tg);
        r.std_error = zero_history(g, tg);
        for (std::size_t m = 0; m < frames; ++m)
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double mu = s.frames[m].v[i] / cnt;
                const double var = std::max(0.0, (s2.frames[m].v[i] - cnt * mu * mu) / (cnt - 1.0));
                r.C.frames[m].v[i] = mu;
                r.std_error.frames[m].v[i] = std::sqrt(var / cnt);
            }
    }
    for (const auto& f : r.C.frames) r.average.push_back(mean(f));
    return r;
}

ScalarHistory wick_product(const VectorHistory& gradY, const VectorHistory& F, const ScalarHistory& C) {
    if (gradY.size() != F.size() || F.size() != C.size()) fail(ErrorKind::InvalidArgument, "stamp mismatch in Wick product");
    for (std::size_t m = 0; m < C.size(); ++m)
        if (std::abs(gradY.times[m] - C.times[m]) > 1e-12 || std::abs(F.times[m] - C.times[m]) > 1e-12)
            fail(ErrorKind::InvalidArgument, "stamp mismatch in Wick product");
    ScalarHistory out;
    out.times = C.times;
    for (std::size_t m = 0; m < C.size(); ++m) {
        ScalarField w(C.frames[m].grid);
        const auto& g = gradY.frames[m];
        const auto& f = F.frames[m];
        for (std::size_t i = 0; i < w.v.size(); ++i)
            w.v[i] = g.c[0][i] * f.c[0][i] + g.c[1][i] * f.c[1][i] - C.frames[m].v[i];
        out.frames.push_back(std::move(w));
    }
    return out;
}

VectorField transpose_apply(const MatrixField& m, const VectorField& v) {
    check_same_grid(m.grid, v.grid, "transpose_apply");
    VectorField out(v.grid);
    for (std::size_t i = 0; i < v.c[0].size(); ++i) {
        out.c[0][i] = m.c[0][i] * v.c[0][i] + m.c[2][i] * v.c[1][i];
        out.c[1][i] = m.c[1][i] * v.c[0][i] + m.c[3][i] * v.c[1][i];
    }
    return out;
}

MatrixField gradient_matrix(const VectorField& v) {
    MatrixField m(v.grid);
    for (int k = 0; k < 2; ++k) {
        const VectorField gk = fd_gradient(v.component(k));
        m.c[k] = gk.c[0];
        m.c[2 + k] = gk.c[1];
    }
    return m;
}

UpsilonContext make_upsilon_context(const EllipticOperator& L, const CorrectorPack& pack, int N, const TimeGrid& tg,
                                    double delta, const RenormOptions& renorm) {
    if (L.backend() != Backend::FiniteDifference)
        fail(ErrorKind::InvalidArgument, "the enhanced noise is built on the staggered backend");
    UpsilonContext ctx;
    ctx.L = L;
    ctx.L0 = EllipticOperator(constant_coefficient(L.grid(), pack.abar), L.options());
    ctx.pack = pack;
    ctx.N = N;
    ctx.tg = tg;
    ctx.delta = delta;
    ctx.mollifier = renorm.mollifier;
    ctx.phi = phi_fields(pack, N, L.grid()).phi;
    const VectorHistory I = I_div_a(L, tg);
    ctx.grad_I.times = I.times;
    for (const auto& f : I.frames) ctx.grad_I.frames.push_back(gradient_matrix(f));
    RenormOptions ro = renorm;
    ro.target = RenormTarget::Flux;
    ro.exact_time = false;
    ctx.C_eps = renorm_field(L, delta, tg, ro);
    ctx.C_0 = renorm_field(ctx.L0, delta, tg, ro);
    return ctx;
}

namespace {

VectorHistory map_frames(const VectorHistory& h, const std::function<VectorField(std::size_t, const VectorField&)>& f) {
    VectorHistory out;
    out.times = h.times;
    for (std::size_t m = 0; m < h.size(); ++m) out.frames.push_back(f(m, h.frames[m]));
    return out;
}

VectorHistory gradients(const ScalarHistory& y) {
    VectorHistory out;
    out.times = y.times;
    for (const auto& f : y.frames) out.frames.push_back(fd_gradient(f));
    return out;
}

ScalarHistory zero_scalar(const ScalarHistory& like) {
    ScalarHistory z = like;
    for (auto& f : z.frames) std::fill(f.v.begin(), f.v.end(), 0.0);
    return z;
}

}  // namespace

UpsilonPair build_upsilon(const UpsilonContext& ctx, const NoiseRealisation& noise) {
    check_same_grid(ctx.L.grid(), noise.field.grid, "build_upsilon");
    if (ctx.pack.cell.n() == 0) fail(ErrorKind::InvalidArgument, "missing corrector pack");
    const ScalarField eta = regularise(noise.field, ctx.delta, ctx.mollifier);
    UpsilonPair out;

    {
        const CoefficientField& a = ctx.L.coefficient();
        const ScalarHistory Y = linear_solution_Y(ctx.L, eta, ctx.tg);
        const ScalarField X = stationary_X(ctx.L, eta);
        const VectorHistory gY = gradients(Y);
        const VectorHistory F = flux_fields(a, Y, FluxVariant::F);
        const VectorHistory Fs = flux_fields(a, Y, FluxVariant::FStar);
        const VectorHistory FD = flux_fields(a, Y, FluxVariant::FD, &X);
        auto phiT = [&](std::size_t, const VectorField& v) { return transpose_apply(ctx.phi, v); };
        auto gIT = [&](std::size_t m, const VectorField& v) { return transpose_apply(ctx.grad_I.frames[m], v); };
        StochasticVector& e = out.eps;
        e.c[0] = scalar_component(Y);
        e.c[1] = vector_component(F);
        e.c[2] = vector_component(map_frames(F, phiT));
        e.c[3] = vector_component(map_frames(F, gIT));
        e.c[4] = vector_component(Fs);
        e.c[5] = vector_component(map_frames(Fs, phiT));
        e.c[6] = vector_component(map_frames(Fs, gIT));
        e.c[7] = vector_component(FD);
        e.c[8] = vector_component(map_frames(FD, phiT));
        e.c[9] = vector_component(map_frames(FD, gIT));
        e.c[10] = scalar_component(wick_product(gY, F, ctx.C_eps.C));
        e.c[11] = scalar_component(wick_product(gY, FD, zero_scalar(ctx.C_eps.C)));
        e.N = ctx.N;
    }
    {
        const CoefficientField& a0 = ctx.L0.coefficient();
        const ScalarHistory Y = linear_solution_Y(ctx.L0, eta, ctx.tg);
        const ScalarField X = stationary_X(ctx.L0, eta);
        const VectorHistory gY = gradients(Y);
        const VectorHistory F = flux_fields(a0, Y, FluxVariant::F);
        const VectorHistory Fs = flux_fields(a0, Y, FluxVariant::FStar);
        const VectorHistory FD = flux_fields(a0, Y, FluxVariant::FD, &X);
        StochasticVector& z = out.limit;
        z.c[0] = scalar_component(Y);
        z.c[1] = vector_component(F);
        z.c[2] = z.c[1];
        z.c[3] = zero_like(z.c[1]);
        z.c[4] = vector_component(Fs);
        z.c[5] = z.c[4];
        z.c[6] = zero_like(z.c[1]);
        z.c[7] = vector_component(FD);
        z.c[8] = z.c[7];
        z.c[9] = zero_like(z.c[1]);
        z.c[10] = scalar_component(wick_product(gY, F, ctx.C_0.C));
        z.c[11] = scalar_component(wick_product(gY, FD, zero_scalar(ctx.C_0.C)));
        z.N = 0;
    }
    for (StochasticVector* v : {&out.eps, &out.limit}) {
        v->delta = ctx.delta;
        v->seed = noise.seed;
    }
    return out;
}

StochasticVector upsilon_difference(const StochasticVector& a, const StochasticVector& b) {
    if (a.seed != b.seed || a.delta != b.delta)
        fail(ErrorKind::InvalidArgument, "unpaired seeds: " + std::to_string(a.seed) + " vs " + std::to_string(b.seed));
    StochasticVector d;
    for (int j = 0; j < 12; ++j) d.c[j] = component_difference(a.c[j], b.c[j]);
    d.N = a.N;
    d.delta = a.delta;
    d.seed = a.seed;
    return d;
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& x) {
    if (x.empty()) return {0.0, 0.0};
    double s = 0.0;
    for (double v : x) s += v;
    const double mu = s / x.size();
    if (x.size() < 2) return {mu, 0.0};
    double q = 0.0;
    for (double v : x) q += (v - mu) * (v - mu);
    return {mu, std::sqrt(q / (x.size() - 1.0) / x.size())};
}

UpsilonDistance upsilon_distance(const UpsilonContext& ctx, const std::vector<std::uint64_t>& seeds, double T,
                                 const UpsilonNormParams& params) {
    require(!seeds.empty(), "seed list is empty");
    UpsilonDistance out;
    out.N = ctx.N;
    out.delta = ctx.delta;
    out.seeds = seeds;
    const std::size_t S = seeds.size();
    out.noise_hashes.assign(S, 0);
    std::vector<UpsilonNormReport> reports(S);
    parallel_chunks(static_cast<int>(S), static_cast<int>(S), [&](int, int b, int e) {
        for (int s = b; s < e; ++s) {
            const NoiseRealisation noise = sample_white_noise(ctx.L.grid(), seeds[s]);
            out.noise_hashes[s] = noise.hash;
            const UpsilonPair p = build_upsilon(ctx, noise);
            reports[s] = upsilon_norm(upsilon_difference(p.eps, p.limit), T, params);
        }
    });
    auto fill = [&](ComponentDistance& cd, auto&& get) {
        for (std::size_t s = 0; s < S; ++s) cd.values.push_back(get(reports[s]));
        std::tie(cd.mean, cd.std_error) = mean_and_stderr(cd.values);
        double q = 0.0;
        for (double v : cd.values) q += v * v;
        cd.second_moment_root = std::sqrt(q / S);
    };
    for (int j = 0; j < 12; ++j) fill(out.components[j], [j](const UpsilonNormReport& r) { return r.per_component[j]; });
    fill(out.total, [](const UpsilonNormReport& r) { return r.total; });
    return out;
}

}  // namespace homlab
