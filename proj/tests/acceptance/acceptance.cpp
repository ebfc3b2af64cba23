// Acceptance checks. Usage: acceptance <k> [k ...] or acceptance all.
// Prints one line per check: "criterion k: PASS|FAIL <detail>".
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "gaussian_lab.hpp"
#include "gpam_solver.hpp"
#include "homogenise.hpp"
#include "littlewood_paley.hpp"
#include "parabolic.hpp"

using namespace homlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.4g", v[i]);
    return s;
}

ScalarField random_normal(const TorusGrid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    ScalarField f(g);
    for (double& x : f.v) x = nd(rng);
    return f;
}

// 1. Bony reconstruction
Outcome bony() {
    std::mt19937_64 rng(20240101);
    double worst = 0.0;
    for (int n : {16, 32, 64}) {
        const TorusGrid g = make_grid(n);
        for (int k = 0; k < 100; ++k) {
            const ScalarField f = random_normal(g, rng), h = random_normal(g, rng);
            const ScalarField sum = para_lt(f, h) + resonant(f, h) + para_gt(f, h);
            for (std::size_t p = 0; p < f.v.size(); ++p) worst = std::max(worst, std::abs(f.v[p] * h.v[p] - sum.v[p]));
        }
    }
    return {worst < 1e-12, fmt("max |fg - (f<g + fog + f>g)| = %.3g over 300 pairs (limit 1e-12)", worst)};
}

// 2. Corrector oracle: harmonic mean across the layers, arithmetic mean along them
Outcome corrector_oracle() {
    const int Q = 1 << 20;
    double inv = 0.0, arith = 0.0;
    for (int q = 0; q < Q; ++q) {
        const double a = 2.0 + std::sin(2.0 * kPi * (q + 0.5) / Q);
        inv += 1.0 / a / Q;
        arith += a / Q;
    }
    const Mat2 oracle{1.0 / inv, 0.0, 0.0, arith};
    const CorrectorPack p = solve_corrector(CoefficientSpec::laminate(2.0, 1.0), 256);
    const double e[4] = {std::abs(p.abar.a11 - oracle.a11), std::abs(p.abar.a12), std::abs(p.abar.a21),
                         std::abs(p.abar.a22 - oracle.a22)};
    const double worst = std::max({e[0], e[1], e[2], e[3]});
    const bool paper = std::abs(oracle.a11 - std::sqrt(3.0)) < 1e-9 && std::abs(oracle.a22 - 2.0) < 1e-9;
    return {worst < 1e-3 && paper,
            fmt("abar = [[%.8f, %.2g], [%.2g, %.8f]], oracle diag(%.8f, %.8f), max entry error %.3g (limit 1e-3)",
                p.abar.a11, p.abar.a12, p.abar.a21, p.abar.a22, oracle.a11, oracle.a22, worst)};
}

// 3. divergence-free corrected flux
Outcome flux_divfree() {
    const int n = 128;
    const CoefficientSpec spec = CoefficientSpec::laminate();
    double worst = 0.0;
    std::vector<double> per;
    for (int N : {4, 8, 16}) {
        const CorrectorPack pack = solve_corrector(spec, n / N, 1e-12);
        const CoefficientField a = sample_coefficient(spec, make_grid(n), N);
        const double d = check_flux_divfree(a, phi_fields(pack, N, make_grid(n)).phi);
        per.push_back(d);
        worst = std::max(worst, d);
    }
    return {worst <= 1e-9, fmt("max |div(a_eps Phi_eps)| for N = 4, 8, 16: %s (limit 1e-9)", list(per).c_str())};
}

// 4. renormalisation oracle for a = Id
Outcome renorm_oracle() {
    const int n = 16;
    const EllipticOperator L(constant_coefficient(make_grid(n), Mat2::identity()), {}, Backend::Spectral);
    const TimeGrid tg(0.5, 5);  // stamps 0.1, ..., 0.5
    double worst_stated = 0.0, worst_exact = 0.0;
    int mc_in = 0, mc_total = 0;
    std::string detail;
    for (int K : {2, 4}) {
        RenormOptions ms;
        ms.exact_time = true;
        const RenormField r = renorm_field(L, 1.0 / K, tg, ms);
        RenormOptions mc;
        mc.method = RenormMethod::MonteCarlo;
        mc.samples = 500;
        mc.seed = 4242 + K;
        mc.exact_time = true;
        const RenormField rm = renorm_field(L, 1.0 / K, tg, mc);
        for (int m : {1, 5}) {
            const double t = tg.t(m);
            double stated = 0.0, exact = 0.0;
            for (int k1 = -K; k1 <= K; ++k1)
                for (int k2 = -K; k2 <= K; ++k2) {
                    if (k1 == 0 && k2 == 0) continue;
                    const double lam = 4.0 * kPi * kPi * (k1 * k1 + k2 * k2);
                    stated += (1.0 - std::exp(-2.0 * lam * t)) / 2.0;
                    exact += std::pow(1.0 - std::exp(-lam * t), 2) / lam;
                }
            const double c = r.average[m];
            worst_stated = std::max(worst_stated, std::abs(c - stated) / stated);
            worst_exact = std::max(worst_exact, std::abs(c - exact) / exact);
            detail += fmt(" K=%d t=%.1f: C=%.10g stated=%.10g;", K, t, c, stated);
            for (std::size_t p : {std::size_t{0}, std::size_t{37}, std::size_t{200}}) {
                ++mc_total;
                if (std::abs(rm.C.frames[m].v[p] - r.C.frames[m].v[p]) <= 3.0 * rm.std_error.frames[m].v[p]) ++mc_in;
            }
        }
    }
    const bool pass = worst_stated < 1e-8 && mc_in == mc_total;
    return {pass, fmt("mode sum vs stated closed form: max rel error %.3g (limit 1e-8);%s spatial-noise Fourier sum "
                      "sum (1-e^{-4pi^2|k|^2 t})^2/(4pi^2|k|^2): max rel error %.3g; Monte Carlo within 3 SE at %d/%d nodes",
                      worst_stated, detail.c_str(), worst_exact, mc_in, mc_total)};
}

// 5. G_eps bounds
Outcome g_bounds() {
    const int n = 128;
    const CoefficientSpec spec = CoefficientSpec::laminate();
    const TimeGrid tg(0.25, 50);
    std::vector<double> sup, grad;
    for (int N : {4, 8, 16}) {
        const CorrectorPack pack = solve_corrector(spec, n / N);
        const EllipticOperator L(sample_coefficient(spec, make_grid(n), N));
        const GDecayReport r = G_field(L, pack, N, tg).report;
        sup.push_back(r.sup_ratio);
        grad.push_back(r.grad_ratio);
    }
    auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    };
    const double s1 = spread(sup), s2 = spread(grad);
    const double C = std::max(*std::max_element(sup.begin(), sup.end()), *std::max_element(grad.begin(), grad.end()));
    return {s1 < 2.0 && s2 < 2.0,
            fmt("sup|G|/eps: %s (spread %.3f); sup sqrt(t)|grad G|/eps: %s (spread %.3f); common constant %.4g (spread limit 2)",
                list(sup).c_str(), s1, list(grad).c_str(), s2, C)};
}

// 6. flux identity
Outcome flux_identity() {
    const int n = 128;
    const TimeGrid tg(0.25, 50);
    std::vector<double> v;
    for (int N : {4, 8, 16}) {
        const CoefficientSpec spec = CoefficientSpec::laminate();
        const CorrectorPack pack = solve_corrector(spec, n / N);
        const EllipticOperator L(sample_coefficient(spec, make_grid(n), N));
        v.push_back(flux_identity_norm(L, pack, tg, -0.1));
    }
    const CorrectorPack id = solve_corrector(CoefficientSpec::identity(), 32);
    const EllipticOperator Lid(constant_coefficient(make_grid(n), Mat2::identity()));
    const double zero = flux_identity_norm(Lid, id, tg, -0.1);
    return {decreasing(v) && zero <= 1e-10,
            fmt("C^{-0.1} norm for N = 4, 8, 16: %s (must decrease); a = Id: %.3g (limit 1e-10)", list(v).c_str(), zero)};
}

// 7. kernel rate
Outcome kernel_rate() {
    const int n = 256;
    const CoefficientSpec spec = CoefficientSpec::laminate();
    ProbeOptions opt;
    opt.cross = false;
    std::vector<double> eps, diff;
    for (int N : {4, 8, 16}) {
        const CorrectorPack pack = solve_corrector(spec, n / N);
        const EllipticOperator L(sample_coefficient(spec, make_grid(n), N));
        const EllipticOperator L0(constant_coefficient(make_grid(n), pack.abar));
        const KernelProbe p = green_probe(L, L0, pack, N, n / 2, n / 2, {0.05}, opt);
        eps.push_back(1.0 / N);
        diff.push_back(p.slices[0].max_diff);
    }
    const RateFit f = fit_rate("kernel", eps, diff);
    return {!f.degenerate && f.slope >= 0.7 && f.slope <= 1.3,
            fmt("max|Q_eps - Q_0|(0.05) for N = 4, 8, 16: %s; slope %.4f, r^2 %.4f (window [0.7, 1.3])", list(diff).c_str(),
                f.slope, f.r_squared)};
}

// Band-limited field evaluated on a finer grid from its trigonometric coefficients.
ScalarField prolong(const ScalarField& f, int K, int n_fine) {
    const int n = f.grid.n();
    std::vector<std::complex<double>> c;
    std::vector<std::pair<int, int>> ks;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            std::complex<double> s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s += f(i, j) * std::polar(1.0, -2.0 * kPi * (k1 * i + k2 * j) / n);
            c.push_back(s / double(n * n));
            ks.emplace_back(k1, k2);
        }
    ScalarField out(make_grid(n_fine));
    for (int i = 0; i < n_fine; ++i)
        for (int j = 0; j < n_fine; ++j) {
            std::complex<double> s = 0.0;
            for (std::size_t q = 0; q < c.size(); ++q)
                s += c[q] * std::polar(1.0, 2.0 * kPi * (ks[q].first * i + ks[q].second * j) / n_fine);
            out(i, j) = s.real();
        }
    return out;
}

// 8. ansatz identity under (h, dt) halving
Outcome ansatz_identity() {
    const Nonlinearity g = Nonlinearity::make(NonlinearityKind::Sine);
    const CoefficientSpec spec = CoefficientSpec::laminate();
    const int N = 4;
    const double delta = 0.25;
    const ScalarField eta64 = regularise(sample_white_noise(make_grid(64), 1).field, delta);
    std::vector<double> res;
    for (int r = 0; r < 2; ++r) {
        const int n = 64 << r, M = 128 << r;
        const EllipticOperator L(sample_coefficient(spec, make_grid(n), N));
        const TimeGrid tg(0.1, M);
        const ScalarField eta = r == 0 ? eta64 : prolong(eta64, cutoff_modes(delta), n);
        const ScalarField u0 = default_initial_data(L.grid());
        const GpamSolution sol = solve_gpam(L, g, eta, nullptr, u0, tg);
        if (sol.blowup) return {false, "solution hit the blow-up guard"};
        res.push_back(ansatz_residual(make_ansatz_context(L, g, eta, nullptr, tg), sol, u0, tg).sup.value);
    }
    const double factor = res[0] / res[1];
    return {factor >= 1.5, fmt("|u# - RHS|_{LinfLinf}: %.4g at (64, 128), %.4g at (128, 256); factor %.3f (limit 1.5)", res[0],
                               res[1], factor)};
}

// 9. stochastic convergence
Outcome stochastic() {
    const int n = 64;
    const double delta = 0.5, kappa = 0.25;
    const CoefficientSpec spec = CoefficientSpec::laminate();
    const TimeGrid tg(0.1, 64);
    UpsilonNormParams p;
    p.kappa = kappa;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 100; ++s) seeds.push_back(s);
    const int comps[] = {1, 2, 3, 11, 4};
    std::vector<std::vector<double>> means(5);
    std::vector<std::uint64_t> hashes;
    bool paired = true;
    for (int N : {4, 8, 16}) {
        const CorrectorPack pack = solve_corrector(spec, n / N);
        const EllipticOperator L(sample_coefficient(spec, make_grid(n), N));
        const UpsilonContext ctx = make_upsilon_context(L, pack, N, tg, delta);
        const UpsilonDistance d = upsilon_distance(ctx, seeds, tg.T, p);
        if (hashes.empty()) hashes = d.noise_hashes;
        paired = paired && hashes == d.noise_hashes;
        for (int q = 0; q < 5; ++q) means[q].push_back(d.components[comps[q] - 1].mean);
    }
    bool pass = paired;
    std::string detail;
    for (int q = 0; q < 5; ++q) {
        pass = pass && decreasing(means[q]);
        detail += fmt(" %s: %s%s;", upsilon_component_name(comps[q]), list(means[q]).c_str(), decreasing(means[q]) ? "" : " (not decreasing)");
    }
    return {pass, fmt("100 paired seeds, delta %.2g, kappa %.2g, mean distances for N = 4, 8, 16:%s noise paired: %s", delta,
                      kappa, detail.c_str(), paired ? "yes" : "no")};
}

// 10. commutation
Outcome commutation() {
    ExperimentConfig cfg;
    cfg.n = 64;
    cfg.M = 256;  // dt below eps^2/10 at N = 16
    cfg.T = 0.1;
    cfg.N_list = {4, 8, 16};
    cfg.delta_list = {0.125};
    cfg.seed_first = 1;
    cfg.seed_count = 50;
    cfg.g = "sin";
    cfg.coefficient = "laminate";
    const RunResult r = run_commutation(cfg);
    std::vector<double> med, frac;
    for (const auto& c : r.summary["cells"]) {
        med.push_back(c["median_diag"].get<double>());
        frac.push_back(c["blowup_fraction"].get<double>());
    }
    const double worst = *std::max_element(frac.begin(), frac.end());
    return {decreasing(med) && worst < 0.2,
            fmt("median C_s^{0.75,0.1} distance for N = 4, 8, 16: %s (must decrease); blow-up fractions %s (limit 0.2)",
                list(med).c_str(), list(frac).c_str())};
}

// 11. exponential transform under dt halving
Outcome transform() {
    const Nonlinearity lin = Nonlinearity::make(NonlinearityKind::Linear);
    auto residuals = [&](Backend b, int levels) {
        const EllipticOperator L(constant_coefficient(make_grid(64), Mat2::identity()), {}, b);
        const ScalarField eta = regularise(sample_white_noise(make_grid(64), 1).field, 0.5);
        const ScalarField u0 = default_initial_data(L.grid());
        std::vector<double> out;
        for (int r = 0; r < levels; ++r) {
            const TimeGrid tg(0.05, 50 << r);
            const RenormField C = renorm_field(L, 0.5, tg);
            const GpamSolution sol = solve_gpam(L, lin, eta, &C.C, u0, tg);
            out.push_back(hairer_labbe_check(make_ansatz_context(L, lin, eta, &C.C, tg), sol, tg).holder.value);
        }
        return out;
    };
    const std::vector<double> sp = residuals(Backend::Spectral, 2);
    const std::vector<double> fd = residuals(Backend::FiniteDifference, 2);
    const double factor = sp[0] / sp[1];
    return {factor >= 1.5, fmt("sup_t C^{-1} residual, spectral: %.4g -> %.4g, factor %.3f (limit 1.5); staggered FD for "
                               "reference: %.4g -> %.4g",
                               sp[0], sp[1], factor, fd[0], fd[1])};
}

// 12. white-noise isometry
Outcome isometry() {
    const int n = 32, samples = 2000;
    const TorusGrid g = make_grid(n);
    const double h = g.h();
    std::vector<ScalarField> phis;
    std::vector<double> exact;  // continuum L^2 norms squared
    auto add = [&](auto f, double l2) {
        ScalarField s(g);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(i, j) = f(i * h, j * h);
        phis.push_back(s);
        exact.push_back(l2);
    };
    add([](double, double) { return 1.0; }, 1.0);
    add([](double x, double) { return std::cos(2 * kPi * x); }, 0.5);
    add([](double x, double y) { return std::sin(2 * kPi * (x + 2 * y)); }, 0.5);
    add([](double x, double y) { return 1.0 + std::cos(2 * kPi * x) * std::cos(4 * kPi * y); }, 1.25);
    add([](double x, double y) { return 2.0 * std::sin(6 * kPi * x) - std::cos(2 * kPi * y); }, 2.5);

    std::vector<std::vector<double>> pairing(phis.size());
    for (int s = 1; s <= samples; ++s) {
        const ScalarField eta = sample_white_noise(g, static_cast<std::uint64_t>(s)).field;
        for (std::size_t q = 0; q < phis.size(); ++q) pairing[q].push_back(inner(eta, phis[q]));
    }
    bool pass = true;
    std::string detail;
    for (std::size_t q = 0; q < phis.size(); ++q) {
        const auto& x = pairing[q];
        double m = 0.0;
        for (double v : x) m += v / samples;
        std::vector<double> sq;
        for (double v : x) sq.push_back((v - m) * (v - m));
        const auto [var_biased, se] = mean_and_stderr(sq);
        const double var = var_biased * samples / (samples - 1.0);
        const bool ok = std::abs(var - exact[q]) <= 3.0 * se;
        pass = pass && ok;
        detail += fmt(" phi%zu: %.4f vs %.4f (3 SE %.4f)%s;", q + 1, var, exact[q], 3.0 * se, ok ? "" : " out");
    }
    return {pass, fmt("variance of <eta, phi> over %d samples:%s", samples, detail.c_str())};
}

struct Check {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Check> checks = {
        {1, "Bony reconstruction", 10, bony},
        {2, "corrector oracle", 60, corrector_oracle},
        {3, "divergence-free flux", 0, flux_divfree},
        {4, "renormalisation oracle", 120, renorm_oracle},
        {5, "G_eps bounds", 0, g_bounds},
        {6, "flux identity", 0, flux_identity},
        {7, "kernel rate", 600, kernel_rate},
        {8, "ansatz identity", 0, ansatz_identity},
        {9, "stochastic convergence", 1800, stochastic},
        {10, "commutation", 0, commutation},
        {11, "exponential transform", 0, transform},
        {12, "white-noise isometry", 0, isometry},
    };
    std::vector<int> wanted;
    for (int k = 1; k < argc; ++k) {
        const std::string a = argv[k];
        if (a == "all")
            for (const auto& c : checks) wanted.push_back(c.id);
        else
            wanted.push_back(std::atoi(a.c_str()));
    }
    if (wanted.empty()) {
        std::fprintf(stderr, "usage: acceptance <criterion>... | all\n");
        return 2;
    }
    int failures = 0;
    for (int id : wanted) {
        const auto it = std::find_if(checks.begin(), checks.end(), [&](const Check& c) { return c.id == id; });
        if (it == checks.end()) {
            std::fprintf(stderr, "no criterion %d\n", id);
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = it->limit_s <= 0 || secs < it->limit_s;
        const bool pass = o.pass && in_time;
        std::string timing = fmt("%.1f s", secs);
        if (it->limit_s > 0) timing += fmt(" (limit %.0f s)", it->limit_s);
        std::printf("criterion %d: %s %s: %s; %s\n", id, pass ? "PASS" : "FAIL", it->name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
        failures += !pass;
    }
    return failures == 0 ? 0 : 1;
}
