#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "elliptic.hpp"
#include "homogenise.hpp"

namespace homlab {

/// Uniform stamps t_m = m T / M, m = 0..M.
struct TimeGrid {
    double T = 1.0;
    int M = 1;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps);
    double dt() const { return T / M; }
    double t(int m) const { return T * m / M; }
    std::vector<double> stamps() const;
};

enum class Scheme { ImplicitEuler, CrankNicolson };

/// Which stamp the forcing is read at when stepping from t_m to t_{m+1}.
enum class ForcingAt { New, Old };

struct StepOptions {
    Scheme scheme = Scheme::ImplicitEuler;
    ForcingAt forcing = ForcingAt::New;
};

using Forcing = std::function<ScalarField(int m)>;

/// e^{tL} f0 by implicit Euler with ceil(t/dt) equal steps.
ScalarField heat_semigroup(const EllipticOperator& L, const ScalarField& f0, double t, double dt);
ScalarHistory heat_history(const EllipticOperator& L, const ScalarField& f0, const TimeGrid& tg,
                           const StepOptions& opt = {});

/// Duhamel solution of du/dt = L u + F with u(0) = u0. Forcing may be empty.
ScalarHistory solve_inhomogeneous(const EllipticOperator& L, const Forcing& forcing, const ScalarField& u0,
                                  const TimeGrid& tg, const StepOptions& opt = {});
ScalarHistory solve_inhomogeneous(const EllipticOperator& L, const ScalarHistory& forcing, const ScalarField& u0,
                                  const TimeGrid& tg, const StepOptions& opt = {});

/// dY/dt = L Y + eta, Y(0) = 0, for spatial noise eta.
ScalarHistory linear_solution_Y(const EllipticOperator& L, const ScalarField& eta, const TimeGrid& tg,
                                const StepOptions& opt = {});
/// X = (-L)^{-1} <eta>, mean zero.
ScalarField stationary_X(const EllipticOperator& L, const ScalarField& eta);
ScalarHistory D_field(const ScalarHistory& Y, const ScalarField& X);

enum class FluxVariant { F, FStar, FD };

/// Edge-located a grad Y (F), a^T grad Y (F*) or a grad D (F^D, needs X).
VectorHistory flux_fields(const CoefficientField& a, const ScalarHistory& Y, FluxVariant variant,
                          const ScalarField* X = nullptr);

struct GDecayReport {
    int N = 0;
    double eps = 0.0;
    double sup_ratio = 0.0;       // sup_t |G(t)|_inf / eps
    double grad_ratio = 0.0;      // sup_t sqrt(t) |grad G(t)|_inf / eps
    double t_grad_sup = 0.0;
    std::size_t probe_steps = 0;  // internal stamps used for the suprema
};

struct GField {
    VectorHistory G;  // component k belongs to column k of div a
    GDecayReport report;
};

/// G = I(div a_eps) - eps chi(./eps): the homogeneous evolution from
/// -eps chi(./eps), stepped on the uniform stamps. The report's suprema also
/// cover a second run on a geometric grid from 1e-3 eps^2, since grad G
/// changes on the time scale eps^2.
GField G_field(const EllipticOperator& L, const CorrectorPack& pack, int N, const TimeGrid& tg,
               int steps_per_decade = 24);

/// I(div a_eps)(t) directly, as an inhomogeneous solve, one history per column.
VectorHistory I_div_a(const EllipticOperator& L, const TimeGrid& tg, const StepOptions& opt = {});

/// Periodised Gaussian kernel of d/dt - div(abar grad), images |m|_inf <= 5.
double torus_heat_kernel(const Mat2& abar, double t, double x1, double x2);

enum class SourceKind { GridDelta, Gaussian };

struct ProbeOptions {
    SourceKind source = SourceKind::GridDelta;
    double width = 0.0;       // Gaussian source standard deviation
    bool cross = true;        // also R* and R~ from probes shifted in y
    double dt = 1e-3;
    double min_steps = 4.0;   // earliest probe time in units of dt
};

struct KernelSlice {
    double t = 0.0;
    ScalarField Q, Q0;
    VectorField R;            // node-located
    VectorField Rstar;
    MatrixField Rtilde;
    double mass = 0.0;
    double min_Q = 0.0;
    double max_diff = 0.0;    // max_x |Q - Q0|
    double max_R = 0.0, max_Rstar = 0.0, max_Rtilde = 0.0;
    // ratios against eps t^{-(d+1)/2}, eps t^{-(d+2)/2} log(2 + sqrt(t)/eps), eps t^{-(d+3)/2} log(..)
    double diff_envelope = 0.0, R_envelope = 0.0, Rtilde_envelope = 0.0;
};

struct KernelProbe {
    int N = 0;
    int y1 = 0, y2 = 0;
    std::vector<KernelSlice> slices;
};

/// Q_eps(t, ., y0) from a unit-mass source, Q0 from L0 with the same stepping,
/// and the remainders R, R*, R~ assembled with Phi_eps and Phi*_eps.
KernelProbe green_probe(const EllipticOperator& L, const EllipticOperator& L0, const CorrectorPack& pack, int N,
                        int y1, int y2, const std::vector<double>& times, const ProbeOptions& opt = {});

}  // namespace homlab
