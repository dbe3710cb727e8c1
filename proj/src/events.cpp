#include <algorithm>
#include <cmath>
#include <functional>

#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"

namespace mobisim {

namespace {

double component(const MobilityState& s, Variable v) {
    return v == Variable::Congestion ? s.congestion : s.adoption;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

void check_ordered(const Trajectory& traj) {
    if (traj.times.size() != traj.states.size()) {
        throw ValidationError("trajectory", "times and states differ in length");
    }
    if (traj.times.size() < 2) throw ValidationError("trajectory", "needs at least 2 samples");
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        if (!(traj.times[i] > traj.times[i - 1])) {
            throw ValidationError("trajectory", "times not strictly increasing at sample " + std::to_string(i));
        }
    }
}

// Fixed-step re-integration of one sample interval at h/100. Between fine
// points the state is the RK4 step from the left fine point, which makes the
// interpolant continuous and endpoint-exact at every fine point.
class FineInterval {
public:
    FineInterval(const Trajectory& traj, std::size_t left) : params_(traj.params) {
        const double a = traj.times[left];
        const double b = traj.times[left + 1];
        h_ = traj.integrator.step / 100.0;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / h_ - 1e-9)));
        times_.reserve(n + 1);
        states_.reserve(n + 1);
        times_.push_back(a);
        states_.push_back(traj.states[left]);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = a + static_cast<double>(j) * h_;
            const double t_next = (j + 1 == n) ? b : a + static_cast<double>(j + 1) * h_;
            states_.push_back(step_rk4(states_.back(), t, t_next - t, params_));
            times_.push_back(t_next);
        }
    }

    const std::vector<double>& times() const { return times_; }
    const std::vector<MobilityState>& states() const { return states_; }

    MobilityState at(double t) const {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t j = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
        if (j + 1 >= times_.size()) return states_.back();
        if (t == times_[j]) return states_[j];
        return step_rk4(states_[j], times_[j], t - times_[j], params_);
    }

private:
    ModelParams params_;
    double h_ = 0.0;
    std::vector<double> times_;
    std::vector<MobilityState> states_;
};

struct Bracket {
    double lo, hi;
};

// Bisection on g over [lo, hi] where g(lo) and g(hi) have strictly opposite signs.
double bisect(const std::function<double(double)>& g, Bracket br, double time_tol, double value_tol) {
    double g_lo = g(br.lo);
    double g_hi = g(br.hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double best = std::min(std::abs(g_lo), std::abs(g_hi));
        if (br.hi - br.lo <= time_tol && best <= value_tol) break;
        const double mid = 0.5 * (br.lo + br.hi);
        if (mid <= br.lo || mid >= br.hi) break;
        const double g_mid = g(mid);
        if (g_mid == 0.0) return mid;
        if (sign_of(g_mid) == sign_of(g_lo)) {
            br.lo = mid;
            g_lo = g_mid;
        } else {
            br.hi = mid;
            g_hi = g_mid;
        }
    }
    return std::abs(g_lo) <= std::abs(g_hi) ? br.lo : br.hi;
}

bool direction_matches(Direction filter, Direction actual) {
    return filter == Direction::Any || filter == actual;
}

} // namespace

std::string_view to_string(Variable v) { return v == Variable::Congestion ? "congestion" : "adoption"; }

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::Upward: return "upward";
    case Direction::Downward: return "downward";
    case Direction::Any: return "any";
    }
    return "any";
}

double event_value_tolerance(double level) { return 1e-9 * std::max(1.0, std::abs(level)); }

MobilityState evaluate_trajectory(const Trajectory& traj, double t) {
    check_ordered(traj);
    if (!(t >= traj.times.front() && t <= traj.times.back())) {
        throw RangeError("t=" + format_double(t) + " outside trajectory span");
    }
    if (!traj.dense.empty()) return evaluate_dense(traj.dense, t);
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - traj.times.begin()) - 1;
    if (t == traj.times[i]) return traj.states[i];
    return FineInterval(traj, i).at(t);
}

std::vector<EventHit> find_events(const Trajectory& traj, const EventSpec& spec) {
    check_ordered(traj);
    if (!std::isfinite(spec.level)) throw ValidationError("level", "must be finite");

    const double span = traj.times.back() - traj.times.front();
    const double time_tol = 1e-9 * span;
    const double value_tol = event_value_tolerance(spec.level);
    auto offset = [&](const MobilityState& s) { return component(s, spec.variable) - spec.level; };

    std::vector<EventHit> hits;
    int last_sign = 0;
    std::size_t last_idx = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const int s = sign_of(offset(traj.states[i]));
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            const Direction dir = s > 0 ? Direction::Upward : Direction::Downward;
            if (direction_matches(spec.direction, dir)) {
                if (i - last_idx > 1) {
                    // The level was hit exactly on a sample.
                    hits.push_back({traj.times[last_idx + 1], traj.states[last_idx + 1], dir});
                } else if (!traj.dense.empty()) {
                    auto g = [&](double t) { return offset(evaluate_dense(traj.dense, t)); };
                    const double t = bisect(g, {traj.times[last_idx], traj.times[i]}, time_tol, value_tol);
                    hits.push_back({t, evaluate_dense(traj.dense, t), dir});
                } else {
                    const FineInterval fine(traj, last_idx);
                    const auto& ft = fine.times();
                    const auto& fs = fine.states();
                    std::size_t j = 0;
                    bool found = false;
                    for (; j + 1 < fs.size(); ++j) {
                        if (sign_of(offset(fs[j])) == last_sign && sign_of(offset(fs[j + 1])) != last_sign) {
                            found = true;
                            break;
                        }
                    }
                    if (found && offset(fs[j + 1]) == 0.0) {
                        hits.push_back({ft[j + 1], fs[j + 1], dir});
                    } else if (found) {
                        auto g = [&](double t) { return offset(fine.at(t)); };
                        const double t = bisect(g, {ft[j], ft[j + 1]}, time_tol, value_tol);
                        hits.push_back({t, fine.at(t), dir});
                    } else {
                        // Re-integration drifted past the crossing by rounding; take the closer sample.
                        const std::size_t k =
                            std::abs(offset(traj.states[last_idx])) <= std::abs(offset(traj.states[i])) ? last_idx : i;
                        hits.push_back({traj.times[k], traj.states[k], dir});
                    }
                }
                if (spec.which == Which::First) return hits;
            }
        }
        last_sign = s;
        last_idx = i;
    }
    return hits;
}

} // namespace mobisim
