#include "littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "fft.hpp"

namespace homlab {

namespace {

double psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = psi(x);
    return a / (a + psi(1.0 - x));
}

constexpr double kInner = 0.75;
constexpr double kOuter = 4.0 / 3.0;

}  // namespace

double lp_cutoff(double r) { return smooth_step((kOuter - r) / (kOuter - kInner)); }

DyadicPartition::DyadicPartition(const TorusGrid& g) : n_(g.n()) {
    J_ = static_cast<int>(std::lround(std::log2(n_))) - 1;
    const int cols = n_ / 2 + 1;
    w_.assign(J_ + 2, std::vector<double>(static_cast<std::size_t>(n_) * cols, 0.0));
    for (int r = 0; r < n_; ++r) {
        const int k1 = r <= n_ / 2 ? r : r - n_;
        for (int col = 0; col < cols; ++col) {
            const std::size_t id = static_cast<std::size_t>(r) * cols + col;
            for (int j = -1; j <= J_; ++j) w_[j + 1][id] = weight(j, k1, col);
        }
    }
}

double DyadicPartition::weight(int j, int k1, int k2) const {
    require(j >= -1 && j <= J_, "block index out of range");
    const double r = std::hypot(static_cast<double>(k1), static_cast<double>(k2));
    if (j == -1) return lp_cutoff(r);
    const double lo = lp_cutoff(r / std::ldexp(1.0, j));
    if (j == J_) return 1.0 - lo;
    return lp_cutoff(r / std::ldexp(1.0, j + 1)) - lo;
}

const DyadicPartition& dyadic_partition(const TorusGrid& g) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<DyadicPartition>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[g.n()];
    if (!slot) slot = std::make_unique<DyadicPartition>(g);
    return *slot;
}

namespace {

ScalarField block_from(const Spectrum& s, const std::vector<double>& w) {
    Spectrum b = s;
    for (std::size_t i = 0; i < b.c.size(); ++i) b.c[i] *= w[i];
    return inverse_fourier(b);
}

void add_product(ScalarField& acc, const ScalarField& a, const ScalarField& b) {
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += a.v[i] * b.v[i];
}

// sum_j S_{j-2} f Delta_j g
ScalarField low_high(const std::vector<ScalarField>& fb, const std::vector<ScalarField>& gb) {
    const TorusGrid& g = fb[0].grid;
    ScalarField out(g), partial(g);
    // block index b = j + 1; S_{j-2} f = sum of fb[0..b-2]
    for (std::size_t b = 2; b < gb.size(); ++b) {
        for (std::size_t i = 0; i < partial.v.size(); ++i) partial.v[i] += fb[b - 2].v[i];
        add_product(out, partial, gb[b]);
    }
    return out;
}

ScalarField diagonal(const std::vector<ScalarField>& fb, const std::vector<ScalarField>& gb) {
    ScalarField out(fb[0].grid);
    const std::size_t m = fb.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(m - 1, i + 1); ++j) add_product(out, fb[i], gb[j]);
    return out;
}

}  // namespace

ScalarField lp_block(const ScalarField& f, int j) {
    const DyadicPartition& p = dyadic_partition(f.grid);
    if (j < -1 || j > p.max_block()) fail(ErrorKind::InvalidArgument, "block index out of range");
    return block_from(fourier_transform(f), p.weights(j));
}

std::vector<ScalarField> lp_blocks(const ScalarField& f) {
    const DyadicPartition& p = dyadic_partition(f.grid);
    const Spectrum s = fourier_transform(f);
    std::vector<ScalarField> out;
    out.reserve(p.block_count());
    for (int j = -1; j <= p.max_block(); ++j) out.push_back(block_from(s, p.weights(j)));
    return out;
}

ScalarField para_lt(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "para_lt");
    return low_high(lp_blocks(f), lp_blocks(g));
}

ScalarField para_gt(const ScalarField& f, const ScalarField& g) { return para_lt(g, f); }

ScalarField resonant(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "resonant");
    return diagonal(lp_blocks(f), lp_blocks(g));
}

ScalarField para_le(const ScalarField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "para_le");
    const auto fb = lp_blocks(f);
    const auto gb = lp_blocks(g);
    return low_high(fb, gb) + diagonal(fb, gb);
}

ScalarField para_ge(const ScalarField& f, const ScalarField& g) { return para_le(g, f); }

VectorField para_lt(const VectorField& f, const ScalarField& g) {
    check_same_grid(f.grid, g.grid, "para_lt");
    const auto gb = lp_blocks(g);
    VectorField out(g.grid);
    for (int k = 0; k < 2; ++k) out.c[k] = low_high(lp_blocks(f.component(k)), gb).v;
    return out;
}

VectorField para_lt(const ScalarField& f, const VectorField& g) {
    check_same_grid(f.grid, g.grid, "para_lt");
    const auto fb = lp_blocks(f);
    VectorField out(f.grid);
    for (int k = 0; k < 2; ++k) out.c[k] = low_high(fb, lp_blocks(g.component(k))).v;
    return out;
}

VectorField para_ge(const ScalarField& f, const VectorField& g) {
    check_same_grid(f.grid, g.grid, "para_ge");
    const auto fb = lp_blocks(f);
    VectorField out(f.grid);
    for (int k = 0; k < 2; ++k) {
        const auto gb = lp_blocks(g.component(k));
        out.c[k] = (low_high(gb, fb) + diagonal(fb, gb)).v;
    }
    return out;
}

HolderNormReport holder_norm(const ScalarField& f, double alpha) {
    HolderNormReport r;
    r.alpha = alpha;
    const auto blocks = lp_blocks(f);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int j = static_cast<int>(b) - 1;
        const double w = j < 0 ? 1.0 : std::exp2(j * alpha);
        r.blocks.push_back(w * sup_norm(blocks[b]));
        if (r.blocks.back() > r.value) {
            r.value = r.blocks.back();
            r.argmax = j;
        }
    }
    return r;
}

double holder_value(const ScalarField& f, double alpha) { return holder_norm(f, alpha).value; }

double holder_value(const VectorField& f, double alpha) {
    return std::max(holder_value(f.component(0), alpha), holder_value(f.component(1), alpha));
}

namespace {

struct Displacement {
    int d1, d2;
    double dist;
};

double time_weight(double s, double sigma) { return sigma == 0.0 ? 1.0 : std::pow(s, 0.5 * sigma); }

}  // namespace

WeightedNormReport weighted_spacetime_norm(const ScalarHistory& f, double alpha, double sigma, double pair_budget) {
    require(!f.empty(), "weighted_spacetime_norm: empty history");
    WeightedNormReport r;
    r.alpha = alpha;
    r.sigma = sigma;
    for (const auto& fr : f.frames) r.sup_part = std::max(r.sup_part, sup_norm(fr));

    const TorusGrid& g = f.frames[0].grid;
    const int n = g.n();
    const std::size_t F = f.size();
    const double frame_pairs = 0.5 * static_cast<double>(F) * static_cast<double>(F + 1);
    auto torus_dist = [&](int d1, int d2) {
        const int a = std::min(d1, n - d1), b = std::min(d2, n - d2);
        return std::hypot(a, b) * g.h();
    };

    std::vector<Displacement> disp;
    int stride_x = 1;
    std::size_t stride_t = 1;
    const double full = frame_pairs * static_cast<double>(g.size()) * static_cast<double>(g.size());
    if (full <= pair_budget) {
        for (int d1 = 0; d1 < n; ++d1)
            for (int d2 = 0; d2 < n; ++d2) disp.push_back({d1, d2, torus_dist(d1, d2)});
    } else {
        r.subsampled = true;
        // every displacement within 4 nodes, plus a coarse lattice of far ones
        const int far = std::max(1, n / 8);
        for (int d1 = 0; d1 < n; ++d1)
            for (int d2 = 0; d2 < n; ++d2) {
                const int a = std::min(d1, n - d1), b = std::min(d2, n - d2);
                if ((a <= 4 && b <= 4) || (d1 % far == 0 && d2 % far == 0)) disp.push_back({d1, d2, torus_dist(d1, d2)});
            }
        auto count = [&](int sx, std::size_t st) {
            const double frames = std::ceil(static_cast<double>(F) / st);
            const double per_dim = std::ceil(static_cast<double>(n) / sx);
            return 0.5 * frames * (frames + 1) * per_dim * per_dim * static_cast<double>(disp.size());
        };
        while (count(stride_x, stride_t) > pair_budget && stride_x < n) stride_x *= 2;
        while (count(stride_x, stride_t) > pair_budget && stride_t < F) stride_t *= 2;
        r.warning = "space-time supremum subsampled (base stride " + std::to_string(stride_x) + ", frame stride " +
                    std::to_string(stride_t) + "); the estimate is a lower bound";
    }

    std::vector<std::size_t> frames;
    for (std::size_t m = 0; m < F; m += stride_t) frames.push_back(m);
    if (frames.back() != F - 1) frames.push_back(F - 1);

    double best = 0.0;
    for (std::size_t ia = 0; ia < frames.size(); ++ia) {
        const std::size_t a = frames[ia];
        for (std::size_t ib = 0; ib <= ia; ++ib) {
            const std::size_t b = frames[ib];
            const double t = f.times[a], s = f.times[b];
            const double w = time_weight(s, sigma);
            if (w == 0.0) continue;
            const double dt = std::sqrt(std::max(0.0, t - s));
            const auto& ft = f.frames[a].v;
            const auto& fs = f.frames[b].v;
            for (const auto& d : disp) {
                if (a == b && d.d1 == 0 && d.d2 == 0) continue;
                const double den = std::pow(dt + d.dist, alpha);
                double m = 0.0;
                int bi = 0, bj = 0;
                for (int i = 0; i < n; i += stride_x) {
                    const int yi = (i + d.d1) % n;
                    for (int j = 0; j < n; j += stride_x) {
                        const double diff =
                            std::abs(ft[static_cast<std::size_t>(i) * n + j] - fs[static_cast<std::size_t>(yi) * n + (j + d.d2) % n]);
                        if (diff > m) {
                            m = diff;
                            bi = i;
                            bj = j;
                        }
                    }
                }
                const double ratio = w * m / den;
                if (ratio > best) {
                    best = ratio;
                    r.t = t;
                    r.s = s;
                    r.x1 = bi;
                    r.x2 = bj;
                    r.y1 = (bi + d.d1) % n;
                    r.y2 = (bj + d.d2) % n;
                }
            }
        }
    }
    r.holder_part = best;
    r.value = r.sup_part + r.holder_part;
    return r;
}

WeightedNormReport weighted_spacetime_norm(const ComponentHistory& f, double alpha, double sigma, double pair_budget) {
    require(f.present(), "missing component");
    WeightedNormReport best = weighted_spacetime_norm(f.parts[0], alpha, sigma, pair_budget);
    if (f.dim == 2) {
        WeightedNormReport other = weighted_spacetime_norm(f.parts[1], alpha, sigma, pair_budget);
        if (other.value > best.value) best = other;
    }
    return best;
}

WeightedNormReport weighted_time_norm(const ScalarHistory& f, double sigma, SpatialNormKind kind, double alpha) {
    require(!f.empty(), "weighted_time_norm: empty history");
    WeightedNormReport r;
    r.sigma = sigma;
    r.alpha = kind == SpatialNormKind::Holder ? alpha : 0.0;
    for (std::size_t m = 0; m < f.size(); ++m) {
        const double w = time_weight(f.times[m], sigma);
        if (w == 0.0) continue;
        const double v = w * (kind == SpatialNormKind::Sup ? sup_norm(f.frames[m]) : holder_value(f.frames[m], alpha));
        if (v > r.value) {
            r.value = v;
            r.t = f.times[m];
        }
    }
    r.sup_part = r.value;
    return r;
}

WeightedNormReport weighted_time_norm(const ComponentHistory& f, double sigma, SpatialNormKind kind, double alpha) {
    require(f.present(), "missing component");
    WeightedNormReport best = weighted_time_norm(f.parts[0], sigma, kind, alpha);
    if (f.dim == 2) {
        WeightedNormReport other = weighted_time_norm(f.parts[1], sigma, kind, alpha);
        if (other.value > best.value) best = other;
    }
    return best;
}

namespace {

double frame_holder(const ComponentHistory& f, std::size_t m, double alpha) {
    double v = 0.0;
    for (int k = 0; k < f.dim; ++k) v = std::max(v, holder_value(f.parts[k].frames[m], alpha));
    return v;
}

}  // namespace

double lp_time_holder(const ComponentHistory& f, double p, double alpha) {
    require(f.present(), "missing component");
    const auto& t = f.times();
    double acc = 0.0;
    for (std::size_t m = 1; m < t.size(); ++m) acc += (t[m] - t[m - 1]) * std::pow(frame_holder(f, m, alpha), p);
    return std::pow(acc, 1.0 / p);
}

double time_derivative_holder(const ComponentHistory& f, double alpha) {
    require(f.present(), "missing component");
    const auto& t = f.times();
    double best = 0.0;
    for (std::size_t m = 1; m < t.size(); ++m)
        for (int k = 0; k < f.dim; ++k) {
            const ScalarField d = (1.0 / (t[m] - t[m - 1])) * (f.parts[k].frames[m] - f.parts[k].frames[m - 1]);
            best = std::max(best, holder_value(d, alpha));
        }
    return best;
}

namespace {

ComponentHistory truncate(const ComponentHistory& f, double T) {
    ComponentHistory out = f;
    for (int k = 0; k < f.dim; ++k) {
        auto& h = out.parts[k];
        std::size_t keep = 0;
        while (keep < h.times.size() && h.times[keep] <= T * (1.0 + 1e-12)) ++keep;
        h.times.resize(keep);
        h.frames.resize(keep);
    }
    return out;
}

}  // namespace

UpsilonNormReport upsilon_norm(const StochasticVector& u, double T, const UpsilonNormParams& p) {
    require(p.kappa > 0.0 && p.kappa <= 0.25, "kappa must lie in (0, 1/4]");
    require(T > 0.0, "T must be positive");
    for (int j = 1; j <= 12; ++j)
        if (!u.c[j - 1].present())
            fail(ErrorKind::InvalidArgument, std::string("missing component ") + upsilon_component_name(j));
    UpsilonNormReport r;
    const ComponentHistory Y = truncate(u.c[0], T);
    r.y_holder = std::pow(T, -p.time_weight * p.kappa) * weighted_spacetime_norm(Y, p.alpha, 0.0).value;
    r.y_time_derivative = time_derivative_holder(Y, -1.0 - p.kappa);
    r.per_component[0] = r.y_holder + r.y_time_derivative;
    for (int j = 2; j <= 12; ++j) {
        const ComponentHistory c = truncate(u.c[j - 1], T);
        if (in_group_B(j)) {
            r.per_component[j - 1] = lp_time_holder(c, 1.0 / p.kappa, -p.kappa);
            r.group_B += r.per_component[j - 1];
        } else {
            r.per_component[j - 1] = weighted_time_norm(c, 0.0, SpatialNormKind::Holder, -p.kappa).value;
            r.group_A += r.per_component[j - 1];
        }
    }
    r.total = r.y_holder + r.y_time_derivative + r.group_A + r.group_B;
    return r;
}

}  // namespace homlab
