#pragma once

// Two-variable model of traffic congestion C(t) and AI adoption A(t):
//
//   dC/dt = -k1 * A * C + k2
//   dA/dt =  k3 * (a_max - A) - k4 * C

#include <array>
#include <complex>
#include <string_view>
#include <vector>

namespace mobisim {

struct MobilityState {
    double congestion = 0.0;
    double adoption = 0.0;

    friend bool operator==(const MobilityState&, const MobilityState&) = default;
};

struct ModelParams {
    double k1 = 0.0;  ///< congestion reduction per unit adoption
    double k2 = 0.0;  ///< exogenous congestion inflow
    double k3 = 0.0;  ///< adoption growth rate
    double k4 = 0.0;  ///< congestion drag on adoption
    double a_max = 100.0;

    /// Throws ValidationError naming the first field that breaks
    /// finiteness, k_i >= 0 or a_max > 0.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Derivative {
    double d_congestion = 0.0;
    double d_adoption = 0.0;
};

/// Row-major; rows are (dC/dt, dA/dt), columns are (d/dC, d/dA).
using Matrix2 = std::array<std::array<double, 2>, 2>;

enum class Stability { StableNode, StableSpiral, Saddle, UnstableNode, UnstableSpiral, Marginal };

std::string_view to_string(Stability s);

struct FixedPoint {
    MobilityState state;
    Stability classification = Stability::Marginal;
    std::array<std::complex<double>, 2> eigenvalues;
    double residual = 0.0;  ///< max |rhs| at the point
};

/// Evaluates the right-hand side. No clamping is applied to negative states.
/// Throws DomainError if any input is non-finite.
Derivative rhs(const MobilityState& state, const ModelParams& params);

Matrix2 jacobian(const MobilityState& state, const ModelParams& params);

/// Eigenvalues of a real 2x2 matrix, ordered by descending real part.
std::array<std::complex<double>, 2> eigenvalues(const Matrix2& m);

/// Classifies a fixed point from its Jacobian eigenvalues. Any eigenvalue with
/// |Re| < 1e-9 (|lambda| + 1) makes the point Marginal.
Stability classify(const std::array<std::complex<double>, 2>& eig);

/// Real fixed points, ordered by descending adoption. Requires k1 > 0 and
/// k3 > 0 (DegenerateModelError otherwise). Empty when the adoption
/// quadratic has no real root.
std::vector<FixedPoint> equilibria(const ModelParams& params);

/// Scale used for the residual bound on fixed points: max(1, |k2|, k3 a_max).
double residual_scale(const ModelParams& params);

} // namespace mobisim
