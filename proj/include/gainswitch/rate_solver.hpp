#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "gainswitch/drive_profile.hpp"
#include "gainswitch/errors.hpp"
#include "gainswitch/laser_params.hpp"
#include "gainswitch/waveform.hpp"

namespace gainswitch {

struct SimState {
    double t = 0.0;       // [s]
    double carrier = 0.0; // electron density n [m^-3]
    double photon = 0.0;  // photon density N_s [m^-3]
};

struct TracePoint {
    double t;       // [s]
    double current; // applied pump current (post-filter when filtered) [A]
    double carrier; // [m^-3]
    double photon;  // [m^-3]
};

struct SimTrace {
    double dt = 0.0; // recorded sample spacing [s]
    std::vector<TracePoint> points;
    long clamp_events = 0; // negative-density clamps during integration
    LaserParams params;
    DriveProfile drive;
};

struct Derivatives {
    double d_carrier; // dn/dt [m^-3 s^-1]
    double d_photon;  // dN_s/dt [m^-3 s^-1]
};

// Coupled single-mode rate equations:
//   dn/dt   = -G a (n - n_g) N_s / (1 + eps N_s) - n/tau_n + I/(qV)
//   dN_s/dt = +G a (n - n_g) N_s / (1 + eps N_s) + G beta n / tau_mode - N_s/tau_p
inline Derivatives derivatives(const SimState& s, double i_now, const LaserParams& p) {
    const double tau_n = p.tau_n > 0.0 ? p.tau_n : carrier_lifetime(p);
    const double stim = p.gamma * p.a_gain * (s.carrier - p.n_transparency) * s.photon /
                        (1.0 + p.epsilon * s.photon);
    const double spont = p.gamma * p.beta * s.carrier / p.tau_mode;
    return {
        -stim - s.carrier / tau_n + i_now / (p.q_charge * p.volume),
        stim + spont - s.photon / p.tau_p,
    };
}

namespace detail {

inline constexpr double kDensityCeiling = 1e35; // [m^-3]

inline void check_step(double dt, double t_end, const LaserParams& p) {
    if (!(dt > 0.0))
        throw config_error("time step must be > 0");
    const double limit = p.tau_p / 20.0;
    if (dt > limit * (1.0 + 1e-12))
        throw config_error("time step too large: dt = " + std::to_string(dt) +
                           " s exceeds tau_p/20 = " + std::to_string(limit) + " s");
    if (!(t_end >= dt))
        throw config_error("t_end must be at least one step");
}

inline void check_density(double value, double t, const char* name) {
    if (!std::isfinite(value) || value > kDensityCeiling)
        throw numeric_error(std::string("numerical blowup in ") + name + " at t = " +
                            std::to_string(t) + " s; reduce dt");
}

struct FilterTrack {
    bool active = false;
    double tau = 0.0;
    double value = 0.0;
    // exact hold update over a sub-step of length h
    double advanced(double i_in, double h) const {
        return active ? value + (i_in - value) * (-std::expm1(-h / tau)) : i_in;
    }
};

} // namespace detail

// Forward-Euler integration of the rate equations under the given drive.
// Densities are clamped at zero from below (undershoot events counted).
// Every record_stride-th step is recorded, starting at t = 0.
inline SimTrace simulate(const LaserParams& params, const DriveProfile& drive, double dt,
                         double t_end, SimState initial = {}, long record_stride = 1) {
    const LaserParams p = validated(params);
    check_profile(drive);
    detail::check_step(dt, t_end, p);
    if (record_stride < 1)
        throw config_error("record stride must be >= 1");

    const long steps = std::lround(t_end / dt);
    SimTrace trace;
    trace.dt = dt * double(record_stride);
    trace.params = p;
    trace.drive = drive;
    trace.points.reserve(std::size_t(steps / record_stride) + 2);

    double n = initial.carrier, N = initial.photon;
    detail::FilterTrack filter;
    if (drive.filter_tau) {
        filter.active = true;
        filter.tau = *drive.filter_tau;
        filter.value = drive.current_at(0.0);
    }

    for (long k = 0; k <= steps; ++k) {
        const double t = double(k) * dt;
        const double i_raw = drive.current_at(std::min(t, drive.t_end()));
        const double i_now = filter.active ? filter.value : i_raw;
        if (k % record_stride == 0)
            trace.points.push_back({t, i_now, n, N});
        if (k == steps) break;

        const Derivatives d = derivatives({t, n, N}, i_now, p);
        n += dt * d.d_carrier;
        N += dt * d.d_photon;
        if (n < 0.0) { n = 0.0; ++trace.clamp_events; }
        if (N < 0.0) { N = 0.0; ++trace.clamp_events; }
        detail::check_density(n, t, "carrier density");
        detail::check_density(N, t, "photon density");
        if (filter.active)
            filter.value = filter.advanced(i_raw, dt);
    }
    return trace;
}

// Classic fourth-order Runge-Kutta companion of simulate(), used as an
// independent reference for the Euler integrator. Same clamping, guards
// and recording behaviour.
inline SimTrace simulate_rk4(const LaserParams& params, const DriveProfile& drive, double dt,
                             double t_end, SimState initial = {}, long record_stride = 1) {
    const LaserParams p = validated(params);
    check_profile(drive);
    detail::check_step(dt, t_end, p);
    if (record_stride < 1)
        throw config_error("record stride must be >= 1");

    const long steps = std::lround(t_end / dt);
    SimTrace trace;
    trace.dt = dt * double(record_stride);
    trace.params = p;
    trace.drive = drive;
    trace.points.reserve(std::size_t(steps / record_stride) + 2);

    double n = initial.carrier, N = initial.photon;
    detail::FilterTrack filter;
    if (drive.filter_tau) {
        filter.active = true;
        filter.tau = *drive.filter_tau;
        filter.value = drive.current_at(0.0);
    }
    const double drive_end = drive.t_end();
    auto current_raw = [&](double t) { return drive.current_at(std::min(t, drive_end)); };

    for (long k = 0; k <= steps; ++k) {
        const double t = double(k) * dt;
        const double i_here = filter.active ? filter.value : current_raw(t);
        if (k % record_stride == 0)
            trace.points.push_back({t, i_here, n, N});
        if (k == steps) break;

        // pump current at the three stage times
        const double i0 = i_here;
        const double i_half = filter.active ? filter.advanced(current_raw(t), dt / 2.0)
                                            : current_raw(t + dt / 2.0);
        const double i_full = filter.active ? filter.advanced(current_raw(t), dt)
                                            : current_raw(t + dt);

        const Derivatives k1 = derivatives({t, n, N}, i0, p);
        const Derivatives k2 = derivatives(
            {t + dt / 2.0, n + dt / 2.0 * k1.d_carrier, N + dt / 2.0 * k1.d_photon}, i_half, p);
        const Derivatives k3 = derivatives(
            {t + dt / 2.0, n + dt / 2.0 * k2.d_carrier, N + dt / 2.0 * k2.d_photon}, i_half, p);
        const Derivatives k4 = derivatives(
            {t + dt, n + dt * k3.d_carrier, N + dt * k3.d_photon}, i_full, p);

        n += dt / 6.0 * (k1.d_carrier + 2.0 * k2.d_carrier + 2.0 * k3.d_carrier + k4.d_carrier);
        N += dt / 6.0 * (k1.d_photon + 2.0 * k2.d_photon + 2.0 * k3.d_photon + k4.d_photon);
        if (n < 0.0) { n = 0.0; ++trace.clamp_events; }
        if (N < 0.0) { N = 0.0; ++trace.clamp_events; }
        detail::check_density(n, t, "carrier density");
        detail::check_density(N, t, "photon density");
        if (filter.active)
            filter.value = filter.advanced(current_raw(t), dt);
    }
    return trace;
}

inline void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    out << "t_s,current_A,carrier_per_m3,photon_per_m3\n";
    char buf[160];
    for (const auto& pt : trace.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", pt.t, pt.current,
                      pt.carrier, pt.photon);
        out << buf;
    }
}

inline void write_trace_csv_file(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw config_error("cannot write trace file: " + path);
    write_trace_csv(trace, out);
}

// Photon-density waveform over [t_from, t_to].
inline Waveform photon_waveform(const SimTrace& trace, double t_from = 0.0,
                                double t_to = std::numeric_limits<double>::infinity()) {
    std::vector<double> t, v;
    t.reserve(trace.points.size());
    v.reserve(trace.points.size());
    for (const auto& pt : trace.points) {
        if (pt.t >= t_from && pt.t <= t_to) {
            t.push_back(pt.t);
            v.push_back(pt.photon);
        }
    }
    return make_waveform(std::move(t), std::move(v));
}

inline Waveform carrier_waveform(const SimTrace& trace, double t_from = 0.0,
                                 double t_to = std::numeric_limits<double>::infinity()) {
    std::vector<double> t, v;
    for (const auto& pt : trace.points) {
        if (pt.t >= t_from && pt.t <= t_to) {
            t.push_back(pt.t);
            v.push_back(pt.carrier);
        }
    }
    return make_waveform(std::move(t), std::move(v));
}

} // namespace gainswitch
