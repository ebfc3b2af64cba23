#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "calculus.hpp"
#include "field_io.hpp"
#include "parallel.hpp"

#ifndef HOMLAB_GIT_DESCRIBE
#define HOMLAB_GIT_DESCRIBE "unknown"
#endif

namespace homlab {

using nlohmann::json;

// ---------------------------------------------------------------- config

std::string OutputFormats::list() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += ",";
        s += name;
    };
    add(csv, "csv");
    add(json, "json");
    add(svg, "svg");
    return s;
}

CoefficientSpec ExperimentConfig::coefficient_spec() const {
    if (coefficient == "identity") return CoefficientSpec::identity();
    if (coefficient == "laminate") return CoefficientSpec::laminate(base, amplitude);
    if (coefficient == "trig") return CoefficientSpec::trig(base, amplitude, skew);
    fail(ErrorKind::Config, "unknown coefficient: " + coefficient);
}

Nonlinearity ExperimentConfig::nonlinearity() const { return Nonlinearity::parse(g, g_const); }

Backend ExperimentConfig::backend_kind() const {
    return backend == "spectral" ? Backend::Spectral : Backend::FiniteDifference;
}

Mollifier ExperimentConfig::mollifier_kind() const { return mollifier == "heat" ? Mollifier::Heat : Mollifier::Sharp; }

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
    std::vector<std::uint64_t> s;
    for (int k = 0; k < seed_count; ++k) s.push_back(seed_first + static_cast<std::uint64_t>(k));
    return s;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", x);
    return buf;
}

namespace {

std::string short_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_floating_point_v<T>)
            s += short_number(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const auto slash = t.find('/');
    try {
        std::size_t pos = 0;
        if (slash != std::string::npos) {
            const double a = std::stod(t.substr(0, slash), &pos);
            if (pos != slash) return false;
            const std::string rest = t.substr(slash + 1);
            const double b = std::stod(rest, &pos);
            if (pos != rest.size() || b == 0.0) return false;
            out = a / b;
            return true;
        }
        out = std::stod(t, &pos);
        return pos == t.size();
    } catch (...) {
        return false;
    }
}

bool parse_long(const std::string& s, long long& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stoll(t, &pos);
        return pos == t.size();
    } catch (...) {
        return false;
    }
}

bool parse_bool(const std::string& s, bool& out) {
    const std::string t = trim(s);
    if (t == "1" || t == "true" || t == "on" || t == "yes") return out = true, true;
    if (t == "0" || t == "false" || t == "off" || t == "no") return out = false, true;
    return false;
}

std::string normalise_key(std::string k) {
    k = trim(k);
    std::replace(k.begin(), k.end(), '-', '_');
    if (k.rfind("__", 0) == 0) k = k.substr(2);
    if (k == "steps") k = "M";
    return k;
}

}  // namespace

void ConfigBuilder::set(const std::string& raw_key, const std::string& value) {
    const std::string key = normalise_key(raw_key);
    const std::string v = trim(value);
    auto bad = [&](const std::string& what) { errors_.push_back(key + ": " + what + " (got '" + v + "')"); };
    auto as_double = [&](double& dst) {
        double x;
        if (parse_double(v, x)) dst = x;
        else bad("expected a number");
    };
    auto as_int = [&](int& dst) {
        long long x;
        if (parse_long(v, x) && x >= -(1LL << 30) && x <= (1LL << 30)) dst = static_cast<int>(x);
        else bad("expected an integer");
    };
    auto as_doubles = [&](std::vector<double>& dst) {
        std::vector<double> out;
        for (const auto& item : split(v, ',')) {
            double x;
            if (!parse_double(item, x)) return bad("expected a comma-separated list of numbers");
            out.push_back(x);
        }
        dst = out;
    };

    if (key == "coefficient") cfg_.coefficient = v;
    else if (key == "base") as_double(cfg_.base);
    else if (key == "amplitude") as_double(cfg_.amplitude);
    else if (key == "skew") as_double(cfg_.skew);
    else if (key == "g") cfg_.g = v;
    else if (key == "g_const") as_double(cfg_.g_const);
    else if (key == "n") as_int(cfg_.n);
    else if (key == "M") as_int(cfg_.M);
    else if (key == "T") as_double(cfg_.T);
    else if (key == "N_list") {
        std::vector<int> out;
        for (const auto& item : split(v, ',')) {
            long long x;
            if (!parse_long(item, x) || x < 1 || x > (1 << 20)) return bad("expected a comma-separated list of positive integers");
            out.push_back(static_cast<int>(x));
        }
        cfg_.N_list = out;
    } else if (key == "delta_list") as_doubles(cfg_.delta_list);
    else if (key == "seeds") {
        long long a, b;
        const auto dash = v.find_first_of("-:");
        if (dash != std::string::npos && dash > 0) {
            if (!parse_long(v.substr(0, dash), a) || !parse_long(v.substr(dash + 1), b) || a < 0 || b < a)
                return bad("expected first-last with first <= last");
            cfg_.seed_first = static_cast<std::uint64_t>(a);
            cfg_.seed_count = static_cast<int>(b - a + 1);
        } else {
            if (!parse_long(v, a) || a < 1) return bad("expected a seed count or a range first-last");
            cfg_.seed_first = 1;
            cfg_.seed_count = static_cast<int>(a);
        }
    } else if (key == "kappa") as_double(cfg_.kappa);
    else if (key == "alpha") as_double(cfg_.alpha);
    else if (key == "sigma") as_double(cfg_.sigma);
    else if (key == "out") cfg_.out = v;
    else if (key == "format") {
        OutputFormats f{false, false, false};
        for (const auto& item : split(v, ',')) {
            if (item == "csv") f.csv = true;
            else if (item == "json") f.json = true;
            else if (item == "svg") f.svg = true;
            else return bad("formats are csv, json and svg");
        }
        cfg_.formats = f;
    } else if (key == "guard") as_double(cfg_.guard);
    else if (key == "noise") {
        if (!parse_bool(v, cfg_.noise)) bad("expected on or off");
    } else if (key == "backend") cfg_.backend = v;
    else if (key == "mollifier") cfg_.mollifier = v;
    else if (key == "renorm") {
        if (v == "field") cfg_.renorm_average = false;
        else if (v == "average") cfg_.renorm_average = true;
        else bad("expected field or average");
    } else if (key == "green_times") as_doubles(cfg_.green_times);
    else if (key == "green_dt") as_double(cfg_.green_dt);
    else if (key == "tol") as_double(cfg_.tol);
    else if (key == "pair_budget") as_double(cfg_.pair_budget);
    else if (key == "threads") as_int(cfg_.threads);
    else errors_.push_back("unknown key: " + key);
}

void ConfigBuilder::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors_.push_back(origin + ":" + std::to_string(no) + ": expected key = value");
            continue;
        }
        set(line.substr(0, eq), line.substr(eq + 1));
    }
}

void ConfigBuilder::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        errors_.push_back("cannot read config file " + path);
        return;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path);
}

std::vector<std::string> ConfigBuilder::problems() const {
    std::vector<std::string> all = errors_;
    for (auto& e : validate(cfg_)) all.push_back(std::move(e));
    return all;
}

ExperimentConfig ConfigBuilder::build() const {
    const auto p = problems();
    if (!p.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : p) msg += "\n  " + e;
        fail(ErrorKind::Config, msg);
    }
    return cfg_;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> e;
    if (c.coefficient != "identity" && c.coefficient != "laminate" && c.coefficient != "trig")
        e.push_back("coefficient must be identity, laminate or trig");
    else if (c.coefficient != "identity") {
        if (c.coefficient == "laminate" && !(c.base > std::abs(c.amplitude)))
            e.push_back("laminate needs base > |amplitude| for ellipticity");
        if (c.coefficient == "trig") {
            try {
                if (!(ellipticity_bounds(c.coefficient_spec()).lambda > 0.0)) e.push_back("trig coefficient is not elliptic");
            } catch (const std::exception& ex) {
                e.push_back(std::string("coefficient: ") + ex.what());
            }
        }
    }
    if (c.g != "sin" && c.g != "tanh" && c.g != "rational" && c.g != "const" && c.g != "linear")
        e.push_back("g must be sin, tanh, rational, const or linear");
    if (c.n < 8 || !is_power_of_two(c.n)) e.push_back("n must be a power of two and at least 8");
    if (c.M < 1) e.push_back("steps must be at least 1");
    if (!(c.T > 0.0) || !std::isfinite(c.T)) e.push_back("T must be positive");
    if (c.N_list.empty()) e.push_back("N-list is empty");
    for (int N : c.N_list)
        if (N < 1 || c.n % N != 0 || c.n / N < 2)
            e.push_back("N = " + std::to_string(N) + " must divide n = " + std::to_string(c.n) + " with at least 2 nodes per cell");
    if (c.delta_list.empty()) e.push_back("delta-list is empty");
    for (std::size_t i = 0; i < c.delta_list.size(); ++i) {
        const double d = c.delta_list[i];
        if (!(d > 0.0 && d <= 1.0)) e.push_back("delta = " + short_number(d) + " must lie in (0, 1]");
        if (i > 0 && !(d < c.delta_list[i - 1])) e.push_back("delta-list must be strictly decreasing");
    }
    if (c.seed_count < 1) e.push_back("seed count must be at least 1");
    if (!(c.kappa > 0.0 && c.kappa <= 0.25)) e.push_back("kappa must lie in (0, 1/4]");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) e.push_back("alpha must lie in (0, 1)");
    if (!(c.kappa < c.alpha)) e.push_back("kappa must be below alpha");
    if (!(c.sigma >= 0.0)) e.push_back("sigma must be non-negative");
    if (!c.formats.csv && !c.formats.json && !c.formats.svg) e.push_back("format list is empty");
    if (!(c.guard > 0.0)) e.push_back("guard must be positive");
    if (c.backend != "fd" && c.backend != "spectral") e.push_back("backend must be fd or spectral");
    if (c.mollifier != "sharp" && c.mollifier != "heat") e.push_back("mollifier must be sharp or heat");
    if (!(c.green_dt > 0.0)) e.push_back("green_dt must be positive");
    if (c.green_times.empty()) e.push_back("green_times is empty");
    for (double t : c.green_times)
        if (!(t >= 4.0 * c.green_dt)) e.push_back("probe time " + short_number(t) + " is below 4 green_dt");
    if (!std::is_sorted(c.green_times.begin(), c.green_times.end())) e.push_back("green_times must be increasing");
    if (!(c.tol > 0.0 && c.tol <= 1e-2)) e.push_back("tol must lie in (0, 1e-2]");
    if (!(c.pair_budget >= 1e3)) e.push_back("pair_budget must be at least 1e3");
    if (c.threads < 0) e.push_back("threads must be non-negative");
    if (c.out.empty()) e.push_back("output directory is empty");
    return e;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    return {{"coefficient", coefficient},
            {"base", short_number(base)},
            {"amplitude", short_number(amplitude)},
            {"skew", short_number(skew)},
            {"g", g},
            {"g_const", short_number(g_const)},
            {"n", std::to_string(n)},
            {"M", std::to_string(M)},
            {"T", short_number(T)},
            {"N_list", join(N_list)},
            {"delta_list", join(delta_list)},
            {"seeds", std::to_string(seed_first) + "-" + std::to_string(seed_first + seed_count - 1)},
            {"kappa", short_number(kappa)},
            {"alpha", short_number(alpha)},
            {"sigma", short_number(sigma)},
            {"out", out},
            {"format", formats.list()},
            {"guard", short_number(guard)},
            {"noise", noise ? "on" : "off"},
            {"backend", backend},
            {"mollifier", mollifier},
            {"renorm", renorm_average ? "average" : "field"},
            {"green_times", join(green_times)},
            {"green_dt", short_number(green_dt)},
            {"tol", short_number(tol)},
            {"pair_budget", short_number(pair_budget)},
            {"threads", std::to_string(threads)}};
}

// ---------------------------------------------------------------- fits

RateFit fit_rate(const std::string& name, const std::vector<double>& x, const std::vector<double>& y, double floor) {
    RateFit f;
    f.name = name;
    f.x = x;
    f.y = y;
    if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "fit abscissae and ordinates differ in length");
    if (x.size() < 3) {
        f.degenerate = true;
        f.reason = "fewer than three points";
        return f;
    }
    double ymax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
            f.degenerate = true;
            f.reason = "non-positive or non-finite value";
            return f;
        }
        ymax = std::max(ymax, y[i]);
    }
    if (ymax < 10.0 * floor) {
        f.degenerate = true;
        f.reason = "ordinates within 10x of the discretisation floor";
        return f;
    }
    const double k = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx, dy = std::log(y[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) {
        f.degenerate = true;
        f.reason = "abscissae coincide";
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        sse += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.std_error = x.size() > 2 ? std::sqrt(sse / (k - 2.0) / sxx) : 0.0;
    return f;
}

json fit_json(const RateFit& f) {
    json j;
    j["component"] = f.name;
    j["theta_hat"] = f.degenerate ? json(nullptr) : json(f.slope);
    j["r_squared"] = f.degenerate ? json(nullptr) : json(f.r_squared);
    j["intercept"] = f.degenerate ? json(nullptr) : json(f.intercept);
    j["std_error"] = f.degenerate ? json(nullptr) : json(f.std_error);
    j["degenerate"] = f.degenerate;
    if (f.degenerate) j["reason"] = f.reason;
    j["x"] = f.x;
    j["y"] = f.y;
    return j;
}

// ---------------------------------------------------------------- helpers

namespace {

struct Scale {
    int N = 0;
    CorrectorPack pack;
    EllipticOperator L;
    EllipticOperator L0;
};

Scale make_scale(const ExperimentConfig& cfg, int N) {
    Scale s;
    s.N = N;
    const TorusGrid grid = make_grid(cfg.n);
    const CoefficientSpec spec = cfg.coefficient_spec();
    s.pack = solve_corrector(spec, cfg.n / N, cfg.tol);
    s.L = EllipticOperator(sample_coefficient(spec, grid, N), {}, cfg.backend_kind());
    s.L0 = EllipticOperator(constant_coefficient(grid, s.pack.abar), {}, cfg.backend_kind());
    return s;
}

RenormOptions renorm_options(const ExperimentConfig& cfg) {
    RenormOptions o;
    o.mollifier = cfg.mollifier_kind();
    return o;
}

ScalarField noise_at(const ExperimentConfig& cfg, const NoiseRealisation& base, double delta) {
    if (!cfg.noise) return ScalarField(base.field.grid);
    return regularise(base.field, delta, cfg.mollifier_kind());
}

json mat_json(const Mat2& m) { return json::array({json::array({m.a11, m.a12}), json::array({m.a21, m.a22})}); }

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

std::string fmt_int(long long x) { return std::to_string(x); }

void record_seeds(RunResult& r, const ExperimentConfig& cfg, const std::vector<NoiseRealisation>& noises) {
    r.seeds = cfg.seeds();
    for (const auto& nz : noises) r.noise_hashes.emplace_back(std::to_string(nz.seed), hash_hex(nz.hash));
}

std::vector<NoiseRealisation> sample_all(const ExperimentConfig& cfg) {
    const TorusGrid grid = make_grid(cfg.n);
    std::vector<NoiseRealisation> out;
    for (auto s : cfg.seeds()) out.push_back(sample_white_noise(grid, s));
    return out;
}

Plot loglog_plot(const std::string& name, const std::string& title, const std::string& ylabel,
                 const std::vector<RateFit>& fits) {
    Plot p;
    p.name = name;
    p.title = title;
    p.xlabel = "eps";
    p.ylabel = ylabel;
    for (const auto& f : fits) p.series.push_back({f.name, f.x, f.y});
    return p;
}

}  // namespace

double flux_identity_norm(const EllipticOperator& L, const CorrectorPack& pack, const TimeGrid& tg, double beta) {
    const Calculus d(L);
    const VectorField I = I_div_a(L, tg).frames.back();
    const Mat2 target{pack.abar.a11 - pack.a0.a11, pack.abar.a12 - pack.a0.a12, pack.abar.a21 - pack.a0.a21,
                      pack.abar.a22 - pack.a0.a22};
    const double tv[2][2] = {{target.a11, target.a12}, {target.a21, target.a22}};
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
        const VectorField col = d.flux(d.grad(I.component(k)));
        for (int i = 0; i < 2; ++i) {
            ScalarField e = col.component(i);
            for (double& x : e.v) x -= tv[i][k];
            worst = std::max(worst, holder_value(e, beta));
        }
    }
    return worst;
}

// ---------------------------------------------------------------- runs

RunResult run_corrector(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "corrector";
    const CorrectorPack pack = solve_corrector(cfg.coefficient_spec(), cfg.n, cfg.tol, cfg.backend_kind());
    json j;
    j["coefficient"] = pack.spec.name();
    j["cell_n"] = pack.cell.n();
    j["abar"] = mat_json(pack.abar);
    j["abar_star"] = mat_json(pack.abar_star);
    j["a0_mean"] = mat_json(pack.a0);
    j["residuals"] = {{"chi", pack.solver_residual},
                      {"chi_star", pack.solver_residual_star},
                      {"max_divergence", pack.max_divergence}};
    j["iterations"] = pack.iterations;
    j["harmonic_mean"] = mat_json(harmonic_mean(pack.a));
    r.json_files.emplace_back("corrector", j);
    r.fields.emplace_back("chi", to_file(pack.chi));
    r.fields.emplace_back("chi_star", to_file(pack.chi_star));

    Table t{"corrector", {"quantity", "value"}, {}};
    auto add = [&](const std::string& q, double v) { t.rows.push_back({q, format_number(v)}); };
    add("abar_11", pack.abar.a11);
    add("abar_12", pack.abar.a12);
    add("abar_21", pack.abar.a21);
    add("abar_22", pack.abar.a22);
    add("a0_11", pack.a0.a11);
    add("a0_22", pack.a0.a22);
    add("residual_1", pack.solver_residual[0]);
    add("residual_2", pack.solver_residual[1]);
    add("max_divergence", pack.max_divergence);
    r.tables.push_back(std::move(t));
    r.summary = j;
    return r;
}

RunResult run_linear(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "linear";
    const int N = cfg.N_list.front();
    const double delta = cfg.delta_list.front();
    const Scale s = make_scale(cfg, N);
    const TimeGrid tg = cfg.time_grid();
    const NoiseRealisation base = sample_white_noise(make_grid(cfg.n), cfg.seed_first);
    record_seeds(r, cfg, {base});
    r.seeds = {cfg.seed_first};
    const ScalarField eta = noise_at(cfg, base, delta);
    const ScalarHistory Y = linear_solution_Y(s.L, eta, tg);
    const ScalarField X = stationary_X(s.L, eta);
    const ScalarHistory Y0 = linear_solution_Y(s.L0, eta, tg);

    Table t{"linear", {"t", "sup_Y", "holder_Y", "sup_Y_minus_Y0"}, {}};
    for (std::size_t m = 0; m < Y.size(); ++m)
        t.rows.push_back({format_number(Y.times[m]), format_number(sup_norm(Y.frames[m])),
                          format_number(holder_value(Y.frames[m], cfg.alpha)),
                          format_number(sup_norm(Y.frames[m] - Y0.frames[m]))});
    r.tables.push_back(std::move(t));

    ScalarHistory diff;
    diff.times = Y.times;
    for (std::size_t m = 0; m < Y.size(); ++m) diff.frames.push_back(Y.frames[m] - Y0.frames[m]);
    json norms = json::array();
    auto norm = [&](const std::string& comp, const std::string& kind, double v) {
        norms.push_back({{"component", comp}, {"norm_kind", kind}, {"alpha", cfg.alpha}, {"sigma", cfg.sigma},
                         {"kappa", cfg.kappa}, {"value", v}});
    };
    norm("Y", "C_s^alpha", weighted_spacetime_norm(Y, cfg.alpha, 0.0, cfg.pair_budget).value);
    norm("X", "C^alpha", holder_value(X, cfg.alpha));
    norm("Y-Y0", "C_s^alpha", weighted_spacetime_norm(diff, cfg.alpha, 0.0, cfg.pair_budget).value);
    r.json_files.emplace_back("norms", norms);
    r.fields.emplace_back("Y", to_file(Y));
    r.fields.emplace_back("X", to_file(X));
    r.summary = {{"N", N}, {"delta", delta}, {"norms", norms}};
    return r;
}

RunResult run_renorm(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "renorm";
    const TimeGrid tg = cfg.time_grid();
    Table t{"renorm", {"N", "delta", "t", "C_mean", "C_min", "C_max", "C0_mean"}, {}};
    json rows = json::array();
    for (int N : cfg.N_list) {
        const Scale s = make_scale(cfg, N);
        for (double delta : cfg.delta_list) {
            const RenormField C = renorm_field(s.L, delta, tg, renorm_options(cfg));
            const RenormField C0 = renorm_field(s.L0, delta, tg, renorm_options(cfg));
            for (std::size_t m = 0; m < C.C.size(); ++m) {
                const auto& f = C.C.frames[m].v;
                t.rows.push_back({fmt_int(N), format_number(delta), format_number(C.C.times[m]), format_number(C.average[m]),
                                  format_number(*std::min_element(f.begin(), f.end())),
                                  format_number(*std::max_element(f.begin(), f.end())), format_number(C0.average[m])});
            }
            rows.push_back({{"N", N}, {"delta", delta}, {"modes", C.modes}, {"C_T", C.average.back()},
                            {"C0_T", C0.average.back()}});
        }
    }
    r.tables.push_back(std::move(t));
    r.json_files.emplace_back("renorm", rows);
    r.summary = rows;
    return r;
}

RunResult run_gpam(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "gpam";
    const int N = cfg.N_list.front();
    const double delta = cfg.delta_list.front();
    const Scale s = make_scale(cfg, N);
    const TimeGrid tg = cfg.time_grid();
    const Nonlinearity g = cfg.nonlinearity();
    const NoiseRealisation base = sample_white_noise(make_grid(cfg.n), cfg.seed_first);
    record_seeds(r, cfg, {base});
    r.seeds = {cfg.seed_first};
    const ScalarField eta = noise_at(cfg, base, delta);
    RenormField C;
    if (cfg.noise) C = renorm_field(s.L, delta, tg, renorm_options(cfg));
    const ScalarHistory* Cp = cfg.noise ? &C.C : nullptr;
    const ScalarField u0 = default_initial_data(make_grid(cfg.n));
    const GpamSolution sol = solve_gpam(s.L, g, eta, Cp, u0, tg, {cfg.guard, cfg.renorm_average});

    Table t{"gpam", {"t", "sup_u", "mean_u"}, {}};
    for (std::size_t m = 0; m < sol.u.size(); ++m)
        t.rows.push_back({format_number(sol.u.times[m]), format_number(sup_norm(sol.u.frames[m])),
                          format_number(mean(sol.u.frames[m]))});
    r.tables.push_back(std::move(t));
    r.fields.emplace_back("u", to_file(sol.u));
    r.summary = {{"N", N}, {"delta", delta}, {"blowup", sol.blowup}, {"last_valid", sol.last_valid}};
    if (sol.blowup) r.summary["blowup_time"] = sol.blowup_time;

    json residuals = json::array();
    if (!sol.blowup) {
        const AnsatzContext ctx = make_ansatz_context(s.L, g, eta, Cp, tg, cfg.renorm_average);
        const AnsatzResidual res = ansatz_residual(ctx, sol, u0, tg, cfg.alpha);
        for (const ResidualReport* rep : {&res.sup, &res.holder})
            residuals.push_back({{"identity", rep->identity}, {"norm_kind", rep->norm_kind}, {"value", rep->value},
                                 {"n", rep->n}, {"M", rep->M}});
        if (g.kind == NonlinearityKind::Linear) {
            const TransformResidual hl = hairer_labbe_check(ctx, sol, tg);
            for (const ResidualReport* rep : {&hl.sup, &hl.holder})
                residuals.push_back({{"identity", rep->identity}, {"norm_kind", rep->norm_kind}, {"value", rep->value},
                                     {"n", rep->n}, {"M", rep->M}});
        }
    }
    r.json_files.emplace_back("residual", residuals);
    r.summary["residuals"] = residuals;
    return r;
}

RunResult run_commutation(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "commute";
    const TimeGrid tg = cfg.time_grid();
    const Nonlinearity g = cfg.nonlinearity();
    const TorusGrid grid = make_grid(cfg.n);
    const ScalarField u0 = default_initial_data(grid);
    const std::vector<NoiseRealisation> noises = sample_all(cfg);
    record_seeds(r, cfg, noises);
    const std::vector<double>& deltas = cfg.delta_list;
    const std::size_t D = deltas.size(), S = noises.size();
    const double alpha = cfg.alpha - cfg.kappa;
    set_thread_count(cfg.threads);

    Table cells{"commute_cells", {"N", "delta", "delta_ref", "seed", "noise_hash", "distance", "blowup"}, {}};
    Table summary{"commute_summary", {"N", "delta", "median_diag", "median_ref", "blowup_fraction", "seeds_used"}, {}};
    std::vector<RateFit> fits;
    std::vector<std::vector<double>> med_diag(D);
    std::vector<double> eps;
    json blow = json::array();

    for (int N : cfg.N_list) {
        const Scale s = make_scale(cfg, N);
        eps.push_back(1.0 / N);
        std::vector<RenormField> Ce(D), C0(D);
        if (cfg.noise)
            for (std::size_t d = 0; d < D; ++d) {
                Ce[d] = renorm_field(s.L, deltas[d], tg, renorm_options(cfg));
                C0[d] = renorm_field(s.L0, deltas[d], tg, renorm_options(cfg));
            }
        // diag[d][seed], ref[d][seed], flag[d][seed]
        std::vector<std::vector<double>> diag(D, std::vector<double>(S)), ref(D, std::vector<double>(S));
        std::vector<std::vector<int>> flag(D, std::vector<int>(S));
        const GpamOptions opt{cfg.guard, cfg.renorm_average};
        parallel_chunks(static_cast<int>(S), static_cast<int>(S), [&](int, int b, int e) {
            for (int k = b; k < e; ++k) {
                std::vector<GpamSolution> ue(D), u0s(D);
                for (std::size_t d = 0; d < D; ++d) {
                    const ScalarField eta = noise_at(cfg, noises[k], deltas[d]);
                    ue[d] = solve_gpam(s.L, g, eta, cfg.noise ? &Ce[d].C : nullptr, u0, tg, opt);
                    u0s[d] = solve_gpam(s.L0, g, eta, cfg.noise ? &C0[d].C : nullptr, u0, tg, opt);
                }
                auto distance = [&](const GpamSolution& a, const GpamSolution& b2) {
                    ScalarHistory diff;
                    diff.times = a.u.times;
                    for (std::size_t m = 0; m < a.u.size(); ++m) diff.frames.push_back(a.u.frames[m] - b2.u.frames[m]);
                    return weighted_spacetime_norm(diff, alpha, cfg.sigma, cfg.pair_budget).value;
                };
                for (std::size_t d = 0; d < D; ++d) {
                    const bool bad = ue[d].blowup || u0s[d].blowup;
                    flag[d][k] = bad;
                    diag[d][k] = bad ? std::nan("") : distance(ue[d], u0s[d]);
                    const bool bad_ref = ue[d].blowup || u0s[D - 1].blowup;
                    ref[d][k] = bad_ref ? std::nan("") : distance(ue[d], u0s[D - 1]);
                }
            }
        });
        for (std::size_t d = 0; d < D; ++d) {
            int flagged = 0;
            for (std::size_t k = 0; k < S; ++k) {
                flagged += flag[d][k];
                cells.rows.push_back({fmt_int(N), format_number(deltas[d]), format_number(deltas[d]),
                                      fmt_int(static_cast<long long>(noises[k].seed)), hash_hex(noises[k].hash),
                                      format_number(diag[d][k]), fmt_int(flag[d][k])});
                if (d + 1 != D)
                    cells.rows.push_back({fmt_int(N), format_number(deltas[d]), format_number(deltas[D - 1]),
                                          fmt_int(static_cast<long long>(noises[k].seed)), hash_hex(noises[k].hash),
                                          format_number(ref[d][k]), fmt_int(flag[d][k])});
            }
            const double frac = static_cast<double>(flagged) / S;
            const double md = median(diag[d]);
            med_diag[d].push_back(md);
            summary.rows.push_back({fmt_int(N), format_number(deltas[d]), format_number(md), format_number(median(ref[d])),
                                    format_number(frac), fmt_int(static_cast<long long>(S - flagged))});
            blow.push_back({{"N", N}, {"delta", deltas[d]}, {"blowup_fraction", frac}, {"median_diag", md}});
        }
    }
    for (std::size_t d = 0; d < D; ++d)
        fits.push_back(fit_rate("commute_delta_" + short_number(deltas[d]), eps, med_diag[d], 1e-12));
    r.tables.push_back(std::move(cells));
    r.tables.push_back(std::move(summary));
    r.plots.push_back(loglog_plot("commute", "median distance u_eps - u_0", "median distance", fits));
    r.fits = std::move(fits);
    r.summary = {{"cells", blow}, {"norm", "C_s^{alpha-kappa, sigma}"}};
    return r;
}

RunResult run_flux(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "flux";
    const TimeGrid tg = cfg.time_grid();
    const Nonlinearity g = cfg.nonlinearity();
    const TorusGrid grid = make_grid(cfg.n);
    const ScalarField u0 = default_initial_data(grid);
    const std::vector<NoiseRealisation> noises = sample_all(cfg);
    record_seeds(r, cfg, noises);
    const double delta = cfg.delta_list.back();
    set_thread_count(cfg.threads);

    Table ident{"flux_identity", {"N", "eps", "value"}, {}};
    Table gdecay{"flux_G", {"N", "eps", "sup_ratio", "grad_ratio", "t_grad_sup"}, {}};
    Table dist{"flux_distance", {"N", "seed", "noise_hash", "distance", "blowup"}, {}};
    Table dsum{"flux_distance_summary", {"N", "mean", "stderr", "seeds_used"}, {}};
    std::vector<double> eps, idv, dmeans;
    for (int N : cfg.N_list) {
        const Scale s = make_scale(cfg, N);
        eps.push_back(1.0 / N);
        const double v = flux_identity_norm(s.L, s.pack, tg, -2.0 * cfg.kappa);
        idv.push_back(v);
        ident.rows.push_back({fmt_int(N), format_number(1.0 / N), format_number(v)});
        const GDecayReport G = G_field(s.L, s.pack, N, tg).report;
        gdecay.rows.push_back({fmt_int(N), format_number(G.eps), format_number(G.sup_ratio), format_number(G.grad_ratio),
                               format_number(G.t_grad_sup)});

        RenormField Ce, C0;
        if (cfg.noise) {
            Ce = renorm_field(s.L, delta, tg, renorm_options(cfg));
            C0 = renorm_field(s.L0, delta, tg, renorm_options(cfg));
        }
        const Calculus de(s.L), d0(s.L0);
        std::vector<double> values(noises.size());
        std::vector<int> flags(noises.size());
        parallel_chunks(static_cast<int>(noises.size()), static_cast<int>(noises.size()), [&](int, int b, int e) {
            for (int k = b; k < e; ++k) {
                const ScalarField eta = noise_at(cfg, noises[k], delta);
                const GpamOptions opt{cfg.guard, cfg.renorm_average};
                const GpamSolution a = solve_gpam(s.L, g, eta, cfg.noise ? &Ce.C : nullptr, u0, tg, opt);
                const GpamSolution b0 = solve_gpam(s.L0, g, eta, cfg.noise ? &C0.C : nullptr, u0, tg, opt);
                flags[k] = a.blowup || b0.blowup;
                if (flags[k]) {
                    values[k] = std::nan("");
                    continue;
                }
                VectorHistory diff;
                diff.times = a.u.times;
                for (std::size_t m = 0; m < a.u.size(); ++m)
                    diff.frames.push_back(de.flux(de.grad(a.u.frames[m])) - d0.flux(d0.grad(b0.u.frames[m])));
                values[k] = weighted_time_norm(vector_component(diff), cfg.sigma, SpatialNormKind::Holder,
                                               cfg.alpha - 1.0 - cfg.kappa)
                                .value;
            }
        });
        std::vector<double> ok;
        for (std::size_t k = 0; k < noises.size(); ++k) {
            dist.rows.push_back({fmt_int(N), fmt_int(static_cast<long long>(noises[k].seed)), hash_hex(noises[k].hash),
                                 format_number(values[k]), fmt_int(flags[k])});
            if (!flags[k]) ok.push_back(values[k]);
        }
        const auto [m, se] = ok.size() >= 2 ? mean_and_stderr(ok) : std::pair<double, double>(ok.empty() ? std::nan("") : ok[0], 0.0);
        dmeans.push_back(m);
        dsum.rows.push_back({fmt_int(N), format_number(m), format_number(se), fmt_int(static_cast<long long>(ok.size()))});
    }
    r.fits.push_back(fit_rate("flux_identity", eps, idv, 1e-12));
    r.fits.push_back(fit_rate("flux_distance", eps, dmeans, 1e-12));
    r.tables.push_back(std::move(ident));
    r.tables.push_back(std::move(gdecay));
    r.tables.push_back(std::move(dist));
    r.tables.push_back(std::move(dsum));
    r.plots.push_back(loglog_plot("flux", "flux identity and flux distance", "value", r.fits));
    r.summary = {{"identity", idv}, {"distance_mean", dmeans}};
    return r;
}

RunResult run_stochastic(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "stochastic";
    const TimeGrid tg = cfg.time_grid();
    const double delta = cfg.delta_list.back();
    const std::vector<std::uint64_t> seeds = cfg.seeds();
    set_thread_count(cfg.threads);
    UpsilonNormParams params;
    params.kappa = cfg.kappa;
    params.alpha = cfg.alpha;

    Table t{"stochastic_distance", {"component", "N", "seed_count", "norm_kind", "mean", "stderr"}, {}};
    std::array<std::vector<double>, 13> means;
    std::vector<double> eps;
    bool hashes_recorded = false;
    for (int N : cfg.N_list) {
        const Scale s = make_scale(cfg, N);
        eps.push_back(1.0 / N);
        RenormOptions ro = renorm_options(cfg);
        const UpsilonContext ctx = make_upsilon_context(s.L, s.pack, N, tg, delta, ro);
        const UpsilonDistance d = upsilon_distance(ctx, seeds, cfg.T, params);
        if (!hashes_recorded) {
            r.seeds = seeds;
            for (std::size_t k = 0; k < d.seeds.size(); ++k)
                r.noise_hashes.emplace_back(std::to_string(d.seeds[k]), hash_hex(d.noise_hashes[k]));
            hashes_recorded = true;
        }
        for (int j = 1; j <= 12; ++j) {
            const std::string kind = j == 1 ? "C_s^alpha+dtC^{-1-kappa}" : (in_group_B(j) ? "L^{1/kappa}C^{-kappa}" : "LinfC^{-kappa}");
            const ComponentDistance& c = d.components[j - 1];
            t.rows.push_back({upsilon_component_name(j), fmt_int(N), fmt_int(static_cast<long long>(seeds.size())), kind,
                              format_number(c.mean), format_number(c.std_error)});
            means[j - 1].push_back(c.mean);
        }
        t.rows.push_back({"total", fmt_int(N), fmt_int(static_cast<long long>(seeds.size())), "Y_T", format_number(d.total.mean),
                          format_number(d.total.std_error)});
        means[12].push_back(d.total.mean);
    }
    for (int j = 1; j <= 12; ++j) r.fits.push_back(fit_rate(upsilon_component_name(j), eps, means[j - 1], 1e-12));
    r.fits.push_back(fit_rate("total", eps, means[12], 1e-12));
    r.tables.push_back(std::move(t));
    std::vector<RateFit> shown;
    for (int j : {1, 2, 3, 11}) shown.push_back(r.fits[j - 1]);
    r.plots.push_back(loglog_plot("stochastic", "mean distance to the homogenised enhanced noise", "mean distance", shown));
    json s = json::object();
    for (int j = 1; j <= 12; ++j) s[upsilon_component_name(j)] = means[j - 1];
    s["total"] = means[12];
    r.summary = {{"delta", delta}, {"means", s}};
    return r;
}

RunResult run_green(const ExperimentConfig& cfg) {
    RunResult r;
    r.command = "green";
    const int n = cfg.n;
    const int y = n / 2;
    ProbeOptions opt;
    opt.dt = cfg.green_dt;
    Table t{"green",
            {"N", "t", "max_diff", "max_R", "max_Rstar", "max_Rtilde", "diff_envelope", "R_envelope", "Rtilde_envelope",
             "mass", "min_Q"},
            {}};
    std::vector<double> eps;
    std::vector<std::vector<double>> diffs(cfg.green_times.size());
    double floor = 0.0;
    for (int N : cfg.N_list) {
        const Scale s = make_scale(cfg, N);
        eps.push_back(1.0 / N);
        const KernelProbe p = green_probe(s.L, s.L0, s.pack, N, y, y, cfg.green_times, opt);
        Table k{"kernel_N" + std::to_string(N), {"t", "x1", "x2", "Q", "Q0", "R1", "R2"}, {}};
        for (std::size_t q = 0; q < p.slices.size(); ++q) {
            const KernelSlice& sl = p.slices[q];
            t.rows.push_back({fmt_int(N), format_number(sl.t), format_number(sl.max_diff), format_number(sl.max_R),
                              format_number(sl.max_Rstar), format_number(sl.max_Rtilde), format_number(sl.diff_envelope),
                              format_number(sl.R_envelope), format_number(sl.Rtilde_envelope), format_number(sl.mass),
                              format_number(sl.min_Q)});
            diffs[q].push_back(sl.max_diff);
            floor = std::max(floor, 1e-10 * sup_norm(sl.Q0));
            const TorusGrid& grid = sl.Q.grid;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (n > 64 && j != y) continue;  // the source row only on large grids
                    const std::size_t idx = grid.index(i, j);
                    k.rows.push_back({format_number(sl.t), format_number(node_x(grid, i)), format_number(node_x(grid, j)),
                                      format_number(sl.Q.v[idx]), format_number(sl.Q0.v[idx]),
                                      format_number(sl.R.c[0][idx]), format_number(sl.R.c[1][idx])});
                }
        }
        r.tables.push_back(std::move(k));
    }
    for (std::size_t q = 0; q < cfg.green_times.size(); ++q)
        r.fits.push_back(fit_rate("kernel_diff_t" + short_number(cfg.green_times[q]), eps, diffs[q], floor));
    r.tables.insert(r.tables.begin(), std::move(t));
    r.plots.push_back(loglog_plot("green", "max |Q_eps - Q_0|", "max difference", r.fits));
    json s = json::array();
    for (const auto& f : r.fits) s.push_back(fit_json(f));
    r.summary = {{"fits", s}};
    return r;
}

bool known_command(const std::string& c) {
    static const char* names[] = {"corrector", "linear", "renorm", "gpam", "commute", "flux", "stochastic", "green"};
    return std::find(std::begin(names), std::end(names), c) != std::end(names);
}

RunResult run_command(const std::string& command, const ExperimentConfig& cfg) {
    if (command == "corrector") return run_corrector(cfg);
    if (command == "linear") return run_linear(cfg);
    if (command == "renorm") return run_renorm(cfg);
    if (command == "gpam") return run_gpam(cfg);
    if (command == "commute") return run_commutation(cfg);
    if (command == "flux") return run_flux(cfg);
    if (command == "stochastic") return run_stochastic(cfg);
    if (command == "green") return run_green(cfg);
    fail(ErrorKind::Config, "unknown command: " + command);
}

// ---------------------------------------------------------------- output

std::string version_string() { return std::string("homlab ") + HOMLAB_VERSION + " (" + HOMLAB_GIT_DESCRIBE + ")"; }

std::string render_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
        s += "\n";
    }
    return s;
}

std::string render_svg(const Plot& p) {
    const double W = 640, H = 420, ml = 80, mr = 150, mt = 40, mb = 60;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, std::log10(s.x[i]));
            x1 = std::max(x1, std::log10(s.x[i]));
            y0 = std::min(y0, std::log10(s.y[i]));
            y1 = std::max(y1, std::log10(s.y[i]));
        }
    if (!std::isfinite(x0)) x0 = -1, x1 = 0, y0 = -1, y1 = 0;
    x0 = std::floor(x0 * 10) / 10 - 0.05;
    x1 = std::ceil(x1 * 10) / 10 + 0.05;
    y0 = std::floor(y0 * 10) / 10 - 0.05;
    y1 = std::ceil(y1 * 10) / 10 + 0.05;
    auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };
    char buf[256];
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"24\" font-size=\"14\">%s</text>\n", ml, p.title.c_str());
    s += buf;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                  W - ml - mr, H - mt - mb);
    s += buf;
    for (int k = static_cast<int>(std::ceil(x0 * 10)); k <= static_cast<int>(std::floor(x1 * 10)); ++k) {
        if (k % 5) continue;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(k / 10.0), H - mb + 16,
                      std::pow(10.0, k / 10.0));
        s += buf;
    }
    for (int k = static_cast<int>(std::ceil(y0 * 10)); k <= static_cast<int>(std::floor(y1 * 10)); ++k) {
        if (k % 5) continue;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n", ml - 6, py(k / 10.0) + 4,
                      std::pow(10.0, k / 10.0));
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s (log)</text>\n", (ml + W - mr) / 2, H - 18,
                  p.xlabel.c_str());
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"18\" y=\"%.1f\" transform=\"rotate(-90 18 %.1f)\" text-anchor=\"middle\">%s (log)</text>\n",
                  (mt + H - mb) / 2, (mt + H - mb) / 2, p.ylabel.c_str());
    s += buf;
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& ser = p.series[k];
        const char* col = colours[k % 6];
        std::string pts;
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            if (!(ser.x[i] > 0) || !(ser.y[i] > 0) || !std::isfinite(ser.y[i])) continue;
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(std::log10(ser.x[i])), py(std::log10(ser.y[i])));
            pts += buf;
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", px(std::log10(ser.x[i])),
                          py(std::log10(ser.y[i])), col);
            s += buf;
        }
        if (!pts.empty()) {
            pts.pop_back();
            s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" points=\"" + pts + "\"/>\n";
        }
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", W - mr + 10, mt + 16 + 16.0 * k, col,
                      ser.label.c_str());
        s += buf;
    }
    s += "</svg>\n";
    return s;
}

json manifest(const RunResult& result, const ExperimentConfig& cfg) {
    json m;
    m["command"] = result.command;
    m["version"] = version_string();
    json c = json::object();
    for (const auto& [k, v] : cfg.echo()) c[k] = v;
    m["config"] = c;
    m["seeds"] = result.seeds;
    json h = json::object();
    for (const auto& [k, v] : result.noise_hashes) h[k] = v;
    m["noise_hashes"] = h;
    json f = json::array();
    if (cfg.formats.csv) f.push_back("csv");
    if (cfg.formats.json) f.push_back("json");
    if (cfg.formats.svg) f.push_back("svg");
    m["formats"] = f;
    json fits = json::array();
    for (const auto& x : result.fits) fits.push_back(fit_json(x));
    m["fits"] = fits;
    m["summary"] = result.summary;
    return m;
}

std::vector<std::string> emit(const RunResult& result, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec || !fs::is_directory(cfg.out)) fail(ErrorKind::Io, "unwritable output directory: " + cfg.out);
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& text) {
        const std::string path = (fs::path(cfg.out) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write " + path);
        out << text;
        if (!out) fail(ErrorKind::Io, "write failed: " + path);
        written.push_back(path);
    };
    if (cfg.formats.csv)
        for (const auto& t : result.tables) write(t.name + ".csv", render_csv(t));
    if (cfg.formats.json) {
        for (const auto& [name, j] : result.json_files) write(name + ".json", j.dump(2) + "\n");
        if (!result.fits.empty()) {
            json fits = json::array();
            for (const auto& f : result.fits) fits.push_back(fit_json(f));
            write("fits.json", fits.dump(2) + "\n");
        }
    }
    if (cfg.formats.svg)
        for (const auto& p : result.plots) write(p.name + ".svg", render_svg(p));
    for (const auto& [name, f] : result.fields) {
        const std::string path = (fs::path(cfg.out) / (name + ".hfield")).string();
        write_field_file(path, f);
        written.push_back(path);
        if (cfg.formats.csv && f.times.size() <= 1 && f.n <= 256) {
            const std::string cpath = (fs::path(cfg.out) / (name + ".csv")).string();
            write_field_csv(cpath, f);
            written.push_back(cpath);
        }
    }
    write("manifest.json", manifest(result, cfg).dump(2) + "\n");
    return written;
}

}  // namespace homlab
