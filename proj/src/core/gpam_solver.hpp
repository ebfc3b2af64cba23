#pragma once

#include <array>
#include <limits>
#include <string>

#include "gaussian_lab.hpp"
#include "littlewood_paley.hpp"
#include "parabolic.hpp"

namespace homlab {

enum class NonlinearityKind { Sine, Tanh, Rational, Constant, Linear };

/// g with its first three derivatives. Linear (g(u) = u) is unbounded and
/// exists for the exponential transform check only.
struct Nonlinearity {
    NonlinearityKind kind = NonlinearityKind::Sine;
    double c = 1.0;  // value of the constant nonlinearity
    std::array<double, 4> bounds{};

    static Nonlinearity make(NonlinearityKind kind, double c = 1.0);
    /// "sin", "tanh", "rational", "const", "linear"
    static Nonlinearity parse(const std::string& name, double c = 1.0);
    std::string name() const;

    double g(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double d3(double x) const;
    double derivative(int j, double x) const;
};

ScalarField apply(const Nonlinearity& g, int j, const ScalarField& u);

/// Gradient, flux and divergence matching the operator's backend.
struct Calculus {
    const EllipticOperator* L = nullptr;

    explicit Calculus(const EllipticOperator& op) : L(&op) {}
    VectorField grad(const ScalarField& f) const;
    VectorField flux(const VectorField& v, bool transpose = false) const;
    ScalarField div(const VectorField& v) const;
};

struct GpamOptions {
    double guard = 1e3;
    bool average_renorm = false;  // use the spatial mean of C instead of the field
};

struct GpamSolution {
    ScalarHistory u;  // frames up to the last valid stamp
    bool blowup = false;
    int last_valid = 0;
    double blowup_time = std::numeric_limits<double>::infinity();
};

/// IMEX: u^{m+1} = (I - dt L)^{-1} (u^m + dt g(u^m)(eta - C^m g'(u^m))).
/// C may be null (no renormalisation).
GpamSolution solve_gpam(const EllipticOperator& L, const Nonlinearity& g, const ScalarField& eta, const ScalarHistory* C,
                        const ScalarField& u0, const TimeGrid& tg, const GpamOptions& opt = {});
GpamSolution solve_homogenised(const Mat2& abar, const Nonlinearity& g, const ScalarField& eta, const ScalarHistory* C0,
                               const ScalarField& u0, const TimeGrid& tg, const GpamOptions& opt = {});

/// cos(2 pi x1) + 0.5 sin(2 pi x2)
ScalarField default_initial_data(const TorusGrid& g);

/// u - g(u) < Y per frame.
ScalarHistory u_sharp(const ScalarHistory& u, const Nonlinearity& g, const ScalarHistory& Y);

/// Everything the functionals need besides u.
struct AnsatzContext {
    EllipticOperator L;
    Nonlinearity g;
    ScalarField eta;     // regularised noise
    ScalarHistory Y;
    ScalarField X;       // stationary solution, D = Y - X
    double eta0 = 0.0;   // mean of eta
    ScalarHistory C;     // renormalisation field (zeros when absent)
    bool average_renorm = false;
};

AnsatzContext make_ansatz_context(const EllipticOperator& L, const Nonlinearity& g, const ScalarField& eta,
                                  const ScalarHistory* C, const TimeGrid& tg, bool average_renorm = false);

struct FunctionalBundle {
    VectorField Lambda;       // grad g(u) < Y - g(u) >= grad Y
    VectorField A;            // grad u - g(u) grad Y
    ScalarField u_sharp;
    VectorField grad_u_sharp;
    VectorField F, FD;        // a grad Y, a grad D
    ScalarField wick;         // grad Y . F - C
    ScalarField S;
    ScalarField T1, T2, T;    // T = T1 - T2 < Y
    ScalarField div_a_Lambda;
};

FunctionalBundle functionals(const AnsatzContext& ctx, const ScalarField& u, std::size_t m);
VectorHistory lambda_history(const AnsatzContext& ctx, const GpamSolution& sol);

/// A = Phi v + w + (id + M) Lambda + grad e^{tL} u0 with M = grad I(div a).
VectorField A_from_triple(const MatrixField& phi, const VectorField& v, const VectorField& w, const MatrixField& M,
                          const VectorField& Lambda, const VectorField& grad_heat_u0);

struct TripleSplit {
    VectorField v, w;
};
/// v is the low-frequency part of Phi^{-1} r with r = A - (id + M) Lambda - grad e^{tL} u0; w = r - Phi v.
TripleSplit split_triple(const MatrixField& phi, const VectorField& A, const MatrixField& M, const VectorField& Lambda,
                         const VectorField& grad_heat_u0);

/// A^T F assembled from the enhanced products Phi^T F and F^T grad I(div a):
/// (v + grad e^{tL0} u0) . Phi^T F + w . F + (F + M^T F) . Lambda + Rterm . F,
/// where Rterm = grad e^{tL} u0 - Phi grad e^{tL0} u0.
ScalarField flux_expansion(const MatrixField& phi, const VectorField& v, const VectorField& w, const MatrixField& M,
                           const VectorField& Lambda, const VectorField& grad_heat0_u0, const VectorField& Rterm,
                           const VectorField& F);

struct ResidualReport {
    std::string identity;
    std::string norm_kind;
    double value = 0.0;
    int n = 0;
    int M = 0;
};

struct AnsatzResidual {
    ResidualReport sup;     // L^inf L^inf
    ResidualReport holder;  // C_s^alpha estimator
    ScalarHistory residual;
};

/// u^# against e^{tL}u0 + I(div(a Lambda)) + I(T + S).
AnsatzResidual ansatz_residual(const AnsatzContext& ctx, const GpamSolution& sol, const ScalarField& u0,
                               const TimeGrid& tg, double alpha = 0.8);

struct TransformResidual {
    ResidualReport holder;  // sup_t |r(t)|_{C^{-1}}
    ResidualReport sup;
    ScalarHistory residual;
};

/// Residual of d/dt w = L w + grad Y^T (a + a^T) grad w + (grad Y . a grad Y - C) w for
/// w = u e^{-Y}, by backward difference quotients. Needs g(u) = u.
TransformResidual hairer_labbe_check(const AnsatzContext& ctx, const GpamSolution& sol, const TimeGrid& tg);

struct RtildeReport {
    int N = 0;
    int n = 0;
    int M = 0;
    std::vector<double> per_time;  // sup_x |term(t_m)|
    double value = 0.0;
};

/// The R~-convolution term of the w equation,
/// int_0^t int R~(t-r; x, y) a(y) (Lambda(r, y) - Lambda(t, x)) dy dr, with R~
/// from kernel probes at every source node. Meant for n <= 16.
RtildeReport rtilde_diagnostic(const EllipticOperator& L, const CorrectorPack& pack, int N, const VectorHistory& Lambda,
                               const TimeGrid& tg);

}  // namespace homlab
