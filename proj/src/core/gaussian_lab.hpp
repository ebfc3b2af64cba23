#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "littlewood_paley.hpp"
#include "parabolic.hpp"
#include "upsilon.hpp"

namespace homlab {

/// Spatial white noise on the grid: iid N(0, 1)/h at the nodes, so that
/// <eta, phi> = h^2 sum eta phi has variance |phi|_{L^2}^2.
struct NoiseRealisation {
    std::uint64_t seed = 0;
    ScalarField field;
    std::uint64_t hash = 0;  // FNV-1a of the node values
};

NoiseRealisation sample_white_noise(const TorusGrid& g, std::uint64_t seed);
std::uint64_t field_hash(const ScalarField& f);
std::string hash_hex(std::uint64_t h);

enum class Mollifier { Sharp, Heat };

/// Sharp: keep the modes with |k|_inf <= floor(1/delta). Heat: e^{delta^2 Laplacian}.
ScalarField regularise(const ScalarField& eta, double delta, Mollifier m = Mollifier::Sharp);
int cutoff_modes(double delta);

enum class RenormMethod { ModeSum, MonteCarlo };
/// Flux: E(grad Y . a grad Y). FluxD: E(grad Y . a grad D).
enum class RenormTarget { Flux, FluxD };

struct RenormOptions {
    RenormMethod method = RenormMethod::ModeSum;
    RenormTarget target = RenormTarget::Flux;
    Mollifier mollifier = Mollifier::Sharp;
    int samples = 500;
    std::uint64_t seed = 1;
    /// Constant operators only: evolve each Fourier mode in closed form
    /// instead of by implicit Euler.
    bool exact_time = false;
};

struct RenormField {
    double delta = 0.0;
    RenormOptions options;
    ScalarHistory C;
    ScalarHistory std_error;      // Monte Carlo only, per (t, x)
    std::vector<double> average;  // spatial mean of C per stamp
    int modes = 0;                // basis functions summed (mode sum)
};

/// grad y . a grad z at the nodes, summing the two edge products for the
/// staggered backend and using node values of a for the spectral one.
ScalarField flux_density(const EllipticOperator& L, const ScalarField& y, const ScalarField& z);

/// Y for a constant operator evolved exactly per Fourier mode.
ScalarHistory linear_solution_exact(const EllipticOperator& L, const ScalarField& eta, const TimeGrid& tg);

RenormField renorm_field(const EllipticOperator& L, double delta, const TimeGrid& tg, const RenormOptions& opt = {});

/// grad^T Y . F - C per frame; grad Y and F edge-located.
ScalarHistory wick_product(const VectorHistory& gradY, const VectorHistory& F, const ScalarHistory& C);

/// Deterministic ingredients of the enhanced noise at one (N, delta), shared by
/// every seed.
struct UpsilonContext {
    EllipticOperator L;
    EllipticOperator L0;
    CorrectorPack pack;
    int N = 0;
    TimeGrid tg;
    double delta = 1.0;
    Mollifier mollifier = Mollifier::Sharp;
    MatrixField phi;      // Phi_eps
    MatrixHistory grad_I;  // grad I(div a_eps), entry (i, k) = d_i of column k
    RenormField C_eps;
    RenormField C_0;
};

UpsilonContext make_upsilon_context(const EllipticOperator& L, const CorrectorPack& pack, int N, const TimeGrid& tg,
                                    double delta, const RenormOptions& renorm = {});

/// (M^T v)_k = sum_i M_ik v_i per node.
VectorField transpose_apply(const MatrixField& m, const VectorField& v);
MatrixField gradient_matrix(const VectorField& v);

struct UpsilonPair {
    StochasticVector eps;
    StochasticVector limit;
};

/// Both vectors from the same regularised sample.
UpsilonPair build_upsilon(const UpsilonContext& ctx, const NoiseRealisation& noise);

/// Componentwise difference; throws when the two were not built from one seed.
StochasticVector upsilon_difference(const StochasticVector& a, const StochasticVector& b);

struct ComponentDistance {
    std::vector<double> values;  // per seed
    double mean = 0.0;
    double std_error = 0.0;
    double second_moment_root = 0.0;  // (mean of d^2)^{1/2}
};

struct UpsilonDistance {
    int N = 0;
    double delta = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> noise_hashes;
    std::array<ComponentDistance, 12> components;
    ComponentDistance total;
};

UpsilonDistance upsilon_distance(const UpsilonContext& ctx, const std::vector<std::uint64_t>& seeds, double T,
                                 const UpsilonNormParams& params = {});

/// Mean and standard error of a sample.
std::pair<double, double> mean_and_stderr(const std::vector<double>& x);

}  // namespace homlab
