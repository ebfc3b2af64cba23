#pragma once

#include <string>
#include <vector>

#include "field.hpp"
#include "upsilon.hpp"

namespace homlab {

/// Smooth radial cutoff: 1 on |k| <= 3/4, 0 on |k| >= 4/3, built from the
/// exp(-1/x) mollifier. rho_{-1} = chi, rho_j(k) = chi(k/2^{j+1}) - chi(k/2^j),
/// and the last block J = log2(n) - 1 takes everything above: 1 - chi(k/2^J).
double lp_cutoff(double r);

class DyadicPartition {
public:
    explicit DyadicPartition(const TorusGrid& g);

    int n() const { return n_; }
    int max_block() const { return J_; }
    int block_count() const { return J_ + 2; }
    /// rho_j at the full-plane mode (k1, k2).
    double weight(int j, int k1, int k2) const;
    /// rho_j in Spectrum storage order.
    const std::vector<double>& weights(int j) const { return w_[j + 1]; }

private:
    int n_ = 0;
    int J_ = 0;
    std::vector<std::vector<double>> w_;
};

/// Partitions are cached per grid size.
const DyadicPartition& dyadic_partition(const TorusGrid& g);

ScalarField lp_block(const ScalarField& f, int j);
/// All blocks, index j + 1 holds Delta_j f.
std::vector<ScalarField> lp_blocks(const ScalarField& f);

// f < g = sum_j S_{j-2} f Delta_j g, f o g = sum_{|i-j|<=1} Delta_i f Delta_j g,
// f > g = g < f. Their sum is f g.
ScalarField para_lt(const ScalarField& f, const ScalarField& g);
ScalarField resonant(const ScalarField& f, const ScalarField& g);
ScalarField para_gt(const ScalarField& f, const ScalarField& g);
ScalarField para_le(const ScalarField& f, const ScalarField& g);
ScalarField para_ge(const ScalarField& f, const ScalarField& g);

// Componentwise versions.
VectorField para_lt(const VectorField& f, const ScalarField& g);
VectorField para_ge(const ScalarField& f, const VectorField& g);
VectorField para_lt(const ScalarField& f, const VectorField& g);

struct HolderNormReport {
    double alpha = 0.0;
    std::vector<double> blocks;  // 2^{j alpha} |Delta_j f|_inf, j = -1..J
    double value = 0.0;
    int argmax = -1;
};

/// max_j 2^{j alpha} |Delta_j f|_inf with the j = -1 block weighted 1.
HolderNormReport holder_norm(const ScalarField& f, double alpha);
double holder_value(const ScalarField& f, double alpha);
double holder_value(const VectorField& f, double alpha);

struct WeightedNormReport {
    double alpha = 0.0;
    double sigma = 0.0;
    double kappa = 0.0;
    double value = 0.0;
    double sup_part = 0.0;
    double holder_part = 0.0;
    double t = 0.0;
    double s = 0.0;
    int x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    bool subsampled = false;
    std::string warning;
};

/// Pairs enumerated exactly up to this count, subsampled above it.
constexpr double kPairBudget = 1e8;

/// |f|_{L^inf} + sup_{s<=t, (s,y) != (t,x)} s^{sigma/2} |f(t,x) - f(s,y)| /
/// (sqrt(t-s) + |x-y|)^alpha with torus distance and 0^0 = 1.
WeightedNormReport weighted_spacetime_norm(const ScalarHistory& f, double alpha, double sigma,
                                           double pair_budget = kPairBudget);
WeightedNormReport weighted_spacetime_norm(const ComponentHistory& f, double alpha, double sigma,
                                           double pair_budget = kPairBudget);

enum class SpatialNormKind { Sup, Holder };

/// sup_t t^{sigma/2} |f(t)|_Y with Y = L^inf or C^alpha.
WeightedNormReport weighted_time_norm(const ScalarHistory& f, double sigma, SpatialNormKind kind,
                                      double alpha = 0.0);
WeightedNormReport weighted_time_norm(const ComponentHistory& f, double sigma, SpatialNormKind kind,
                                      double alpha = 0.0);

/// (int_0^T |f(t)|_{C^alpha}^p dt)^{1/p}, right-endpoint rule on the stamps.
double lp_time_holder(const ComponentHistory& f, double p, double alpha);
/// sup_m |(f(t_m) - f(t_{m-1})) / dt|_{C^alpha}.
double time_derivative_holder(const ComponentHistory& f, double alpha);

struct UpsilonNormParams {
    double kappa = 0.1;
    double alpha = 0.8;          // Hoelder exponent of Y in C_s^alpha
    double time_weight = 0.1;    // T^{-time_weight * kappa}
};

struct UpsilonNormReport {
    double total = 0.0;
    double y_holder = 0.0;       // already multiplied by the T weight
    double y_time_derivative = 0.0;
    double group_A = 0.0;
    double group_B = 0.0;
    std::array<double, 12> per_component{};
};

/// The Y_T norm. Frames with t > T are ignored.
UpsilonNormReport upsilon_norm(const StochasticVector& u, double T, const UpsilonNormParams& p = {});

}  // namespace homlab
