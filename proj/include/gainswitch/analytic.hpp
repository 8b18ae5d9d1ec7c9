#pragma once

#include <cmath>
#include <optional>

#include "gainswitch/errors.hpp"
#include "gainswitch/laser_params.hpp"

namespace gainswitch {

// Linearized relaxation-oscillation quantities about an operating point.
// A missing omega means the operating point is overdamped: perturbations
// decay without ringing and no secondary pulse peak is possible.
struct SmallSignal {
    double stimulated_rate = 0.0;  // N_p = G a N_s / (1 + eps N_s) [1/s]
    double damping = 0.0;          // envelope decay rate [1/s]
    std::optional<double> omega;   // relaxation angular frequency [rad/s]

    bool overdamped() const { return !omega.has_value(); }
};

inline SmallSignal small_signal(const LaserParams& params, double n_s) {
    if (!(n_s >= 0.0) || !std::isfinite(n_s))
        throw config_error("photon density must be >= 0");
    const LaserParams p = validated(params);
    SmallSignal out;
    out.stimulated_rate = p.gamma * p.a_gain * n_s / (1.0 + p.epsilon * n_s);
    out.damping = 0.5 * (1.0 / p.tau_n + out.stimulated_rate);
    const double np = out.stimulated_rate;
    const double radicand = np / p.tau_p - 1.0 / (p.tau_n * p.tau_n) -
                            np * np / 4.0 - np / (2.0 * p.tau_n);
    if (radicand > 0.0)
        out.omega = std::sqrt(radicand);
    return out;
}

// Steady photon density for a constant drive current. Below threshold the
// field is spontaneous emission filtered by the cavity; at and above
// threshold the carrier density clamps at n_threshold and every extra
// injected carrier converts to stimulated output.
inline double steady_photon_density(const LaserParams& params, double i) {
    if (!(i >= 0.0) || !std::isfinite(i))
        throw config_error("drive current must be >= 0");
    const LaserParams p = validated(params);
    if (i < p.i_threshold)
        return p.tau_n * p.tau_p * p.gamma * p.beta * i / (p.tau_mode * p.q_charge * p.volume);
    return (p.tau_p / (p.q_charge * p.thickness)) *
           (i * p.thickness / p.volume - p.n_threshold * p.q_charge * p.thickness / p.tau_n);
}

// Time for the carrier density to charge from n_initial to n_final under
// constant current I, before stimulated emission matters:
//   t_r = tau_n ln[(I - qV n_i/tau_n)/(I - qV n_f/tau_n)]
inline double rise_time(const LaserParams& params, double i, double n_initial,
                        double n_final) {
    const LaserParams p = validated(params);
    if (!(n_final >= n_initial))
        throw config_error("rise_time requires n_final >= n_initial");
    const double drain_i = p.q_charge * p.volume * n_initial / p.tau_n;
    const double drain_f = p.q_charge * p.volume * n_final / p.tau_n;
    if (!(i > drain_f))
        throw config_error("insufficient drive: I = " + std::to_string(i) +
                           " A cannot reach the target carrier density (needs > " +
                           std::to_string(drain_f) + " A)");
    return p.tau_n * std::log((i - drain_i) / (i - drain_f));
}

} // namespace gainswitch
