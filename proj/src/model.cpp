#include "mobisim/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"

namespace mobisim {

namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) {
        throw DomainError(std::string(field) + " is not finite");
    }
}

void check_inputs(const MobilityState& s, const ModelParams& p) {
    require_finite(s.congestion, "congestion");
    require_finite(s.adoption, "adoption");
    require_finite(p.k1, "k1");
    require_finite(p.k2, "k2");
    require_finite(p.k3, "k3");
    require_finite(p.k4, "k4");
    require_finite(p.a_max, "a_max");
}

FixedPoint make_fixed_point(MobilityState state, const ModelParams& params) {
    FixedPoint fp;
    fp.state = state;
    const Derivative d = rhs(state, params);
    fp.residual = std::max(std::abs(d.d_congestion), std::abs(d.d_adoption));
    fp.eigenvalues = eigenvalues(jacobian(state, params));
    fp.classification = classify(fp.eigenvalues);
    return fp;
}

} // namespace

std::string_view to_string(Stability s) {
    switch (s) {
    case Stability::StableNode: return "StableNode";
    case Stability::StableSpiral: return "StableSpiral";
    case Stability::Saddle: return "Saddle";
    case Stability::UnstableNode: return "UnstableNode";
    case Stability::UnstableSpiral: return "UnstableSpiral";
    case Stability::Marginal: return "Marginal";
    }
    return "Unknown";
}

void ModelParams::validate() const {
    const std::pair<const char*, double> ks[] = {{"k1", k1}, {"k2", k2}, {"k3", k3}, {"k4", k4}};
    for (const auto& [name, v] : ks) {
        if (!std::isfinite(v)) throw ValidationError(name, "must be finite");
        if (v < 0.0) throw ValidationError(name, "must be ≥ 0 (got " + format_double(v) + ")");
    }
    if (!std::isfinite(a_max)) throw ValidationError("a_max", "must be finite");
    if (!(a_max > 0.0)) throw ValidationError("a_max", "must be > 0 (got " + format_double(a_max) + ")");
}

Derivative rhs(const MobilityState& state, const ModelParams& params) {
    check_inputs(state, params);
    const double c = state.congestion;
    const double a = state.adoption;
    return {-params.k1 * a * c + params.k2, params.k3 * (params.a_max - a) - params.k4 * c};
}

Matrix2 jacobian(const MobilityState& state, const ModelParams& params) {
    check_inputs(state, params);
    return {{{-params.k1 * state.adoption, -params.k1 * state.congestion},
             {-params.k4, -params.k3}}};
}

std::array<std::complex<double>, 2> eigenvalues(const Matrix2& m) {
    const double tr = m[0][0] + m[1][1];
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // Discriminant of lambda^2 - tr lambda + det, written to avoid cancellation
    // when the diagonal entries are close.
    const double half_diff = 0.5 * (m[0][0] - m[1][1]);
    const double disc = half_diff * half_diff + m[0][1] * m[1][0];
    const double half_tr = 0.5 * tr;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        // Larger-magnitude root first, the other from the product to keep precision.
        const double big = half_tr + std::copysign(root, half_tr == 0.0 ? 1.0 : half_tr);
        const double small = big != 0.0 ? det / big : half_tr - root;
        const double hi = std::max(big, small);
        const double lo = std::min(big, small);
        return {std::complex<double>(hi, 0.0), std::complex<double>(lo, 0.0)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
}

Stability classify(const std::array<std::complex<double>, 2>& eig) {
    for (const auto& l : eig) {
        if (std::abs(l.real()) < 1e-9 * (std::abs(l) + 1.0)) return Stability::Marginal;
    }
    const bool complex_pair = eig[0].imag() != 0.0 || eig[1].imag() != 0.0;
    if (complex_pair) {
        return eig[0].real() < 0.0 ? Stability::StableSpiral : Stability::UnstableSpiral;
    }
    const double a = eig[0].real();
    const double b = eig[1].real();
    if (a < 0.0 && b < 0.0) return Stability::StableNode;
    if (a > 0.0 && b > 0.0) return Stability::UnstableNode;
    return Stability::Saddle;
}

double residual_scale(const ModelParams& p) {
    return std::max({1.0, std::abs(p.k2), p.k3 * p.a_max});
}

std::vector<FixedPoint> equilibria(const ModelParams& params) {
    params.validate();
    if (params.k1 == 0.0 || params.k3 == 0.0) {
        throw DegenerateModelError("degenerate model: equilibria require k1 > 0 and k3 > 0");
    }
    const double k1 = params.k1, k2 = params.k2, k3 = params.k3, k4 = params.k4;
    const double a_max = params.a_max;

    std::vector<FixedPoint> out;
    if (k2 == 0.0) {
        // dC/dt = -k1 A C vanishes on C = 0 or A = 0.
        out.push_back(make_fixed_point({0.0, a_max}, params));
        if (k4 > 0.0) out.push_back(make_fixed_point({k3 * a_max / k4, 0.0}, params));
        return out;
    }

    // k1 k3 A^2 - k1 k3 a_max A + k2 k4 = 0, C = k2 / (k1 A)
    const double product = k2 * k4 / (k1 * k3);
    const double disc = a_max * a_max - 4.0 * product;
    if (disc < 0.0) return out;

    const double a_hi = 0.5 * (a_max + std::sqrt(disc));
    out.push_back(make_fixed_point({k2 / (k1 * a_hi), a_hi}, params));
    if (disc > 0.0 && product > 0.0) {
        // With k4 = 0 the second root is A = 0, where C = k2/(k1 A) has no finite value.
        const double a_lo = product / a_hi;
        out.push_back(make_fixed_point({k2 / (k1 * a_lo), a_lo}, params));
    }
    return out;
}

} // namespace mobisim
