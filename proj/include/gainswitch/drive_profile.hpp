#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gainswitch/errors.hpp"

namespace gainswitch {

enum class SegmentShape { kConstant, kRamp };

struct DriveSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    SegmentShape shape = SegmentShape::kConstant;
    double level_start = 0.0; // [A]
    double level_end = 0.0;   // [A], equals level_start for constant shape
};

// Piecewise injection-current waveform I(t). Segments are contiguous,
// cover [0, t_end] and are sampled with the half-open convention
// [t_start, t_end). An optional first-order low-pass (filter_tau) marks
// the profile for driver-filter evaluation inside the solver.
struct DriveProfile {
    std::vector<DriveSegment> segments;
    std::optional<double> filter_tau; // [s]

    double t_end() const { return segments.empty() ? 0.0 : segments.back().t_end; }

    // Unfiltered current at time t in [0, t_end]. The very last instant
    // t == t_end evaluates the final segment from the left.
    double current_at(double t) const {
        if (segments.empty() || t < 0.0 || t > t_end() || !std::isfinite(t))
            throw config_error("drive sample time out of range: t = " + std::to_string(t));
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (t < segments[mid].t_end)
                hi = mid;
            else
                lo = mid + 1;
        }
        const DriveSegment& s = segments[lo];
        if (s.shape == SegmentShape::kConstant)
            return s.level_start;
        const double u = (t - s.t_start) / (s.t_end - s.t_start);
        return s.level_start + (s.level_end - s.level_start) * u;
    }
};

inline void check_profile(const DriveProfile& p) {
    if (p.segments.empty())
        throw config_error("drive profile has no segments");
    double cursor = 0.0;
    for (const auto& s : p.segments) {
        if (!(s.t_end > s.t_start))
            throw config_error("drive segment with non-positive duration");
        const double scale = std::max(1e-12, std::abs(s.t_start));
        if (std::abs(s.t_start - cursor) > 1e-9 * scale)
            throw config_error("drive segments not contiguous from t = 0");
        if (s.level_start < 0.0 || s.level_end < 0.0)
            throw config_error("drive current level below zero");
        if (!std::isfinite(s.level_start) || !std::isfinite(s.level_end))
            throw config_error("drive current level not finite");
        cursor = s.t_end;
    }
    if (p.filter_tau && !(*p.filter_tau > 0.0))
        throw config_error("filter_tau must be > 0");
}

// Two-level step: i_high on [t_on, t_off), i_low elsewhere.
inline DriveProfile step_profile(double i_low, double i_high, double t_on,
                                 double t_off, double t_end) {
    if (!(0.0 <= t_on && t_on < t_off && t_off <= t_end))
        throw config_error("step profile requires 0 <= t_on < t_off <= t_end");
    DriveProfile p;
    if (t_on > 0.0)
        p.segments.push_back({0.0, t_on, SegmentShape::kConstant, i_low, i_low});
    p.segments.push_back({t_on, t_off, SegmentShape::kConstant, i_high, i_high});
    if (t_off < t_end)
        p.segments.push_back({t_off, t_end, SegmentShape::kConstant, i_low, i_low});
    check_profile(p);
    return p;
}

// Pre-bias with a short superimposed perturbation pulse of the given
// width reaching i_peak on [t_pulse, t_pulse + width).
inline DriveProfile gain_switch_profile(double i_bias, double i_peak, double t_pulse,
                                        double width, double t_end) {
    if (!(width > 0.0))
        throw config_error("perturbation width must be > 0");
    if (!(t_pulse >= 0.0))
        throw config_error("perturbation start must be >= 0");
    if (t_pulse + width > t_end)
        throw config_error("perturbation pulse extends past t_end");
    DriveProfile p;
    if (t_pulse > 0.0)
        p.segments.push_back({0.0, t_pulse, SegmentShape::kConstant, i_bias, i_bias});
    p.segments.push_back({t_pulse, t_pulse + width, SegmentShape::kConstant, i_peak, i_peak});
    if (t_pulse + width < t_end)
        p.segments.push_back({t_pulse + width, t_end, SegmentShape::kConstant, i_bias, i_bias});
    check_profile(p);
    return p;
}

// Marks the profile for first-order low-pass evaluation,
// dI_f/dt = (I(t) - I_f)/tau_rc with I_f(0) = I(0).
inline DriveProfile apply_filter(DriveProfile p, double tau_rc) {
    if (!(tau_rc > 0.0))
        throw config_error("filter_tau must be > 0");
    p.filter_tau = tau_rc;
    return p;
}

// One low-pass update over a step of length dt, exact for an input held
// constant across the step. Unconditionally stable, so it also covers the
// degenerate tau << dt case.
inline double lowpass_step(double i_f, double i_in, double dt, double tau) {
    return i_f + (i_in - i_f) * (-std::expm1(-dt / tau));
}

// Filtered current sampled on a uniform grid of n_steps+1 points spaced dt,
// starting at t = 0. Evaluation matches what the solver applies.
inline std::vector<double> lowpass_response(const DriveProfile& p, double dt,
                                            std::size_t n_steps) {
    if (!p.filter_tau)
        throw config_error("profile has no filter_tau");
    if (!(dt > 0.0))
        throw config_error("dt must be > 0");
    std::vector<double> out;
    out.reserve(n_steps + 1);
    double i_f = p.current_at(0.0);
    out.push_back(i_f);
    for (std::size_t k = 0; k < n_steps; ++k) {
        i_f = lowpass_step(i_f, p.current_at(k * dt), dt, *p.filter_tau);
        out.push_back(i_f);
    }
    return out;
}

// Profile file: one record per line,
//   segment <t_start> <t_end> constant <level>
//   segment <t_start> <t_end> ramp <level_start> <level_end>
//   filter_tau <seconds>
// with '#' comments. Times and levels are strict SI numbers.
inline DriveProfile load_drive(std::istream& in, const std::string& origin = "<stream>") {
    DriveProfile p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (tag == "segment") {
            DriveSegment s;
            std::string shape;
            if (!(ls >> s.t_start >> s.t_end >> shape))
                throw config_error(where + ": malformed segment record");
            if (shape == "constant") {
                if (!(ls >> s.level_start))
                    throw config_error(where + ": constant segment needs a level");
                s.shape = SegmentShape::kConstant;
                s.level_end = s.level_start;
            } else if (shape == "ramp") {
                if (!(ls >> s.level_start >> s.level_end))
                    throw config_error(where + ": ramp segment needs two levels");
                s.shape = SegmentShape::kRamp;
            } else {
                throw config_error(where + ": unknown segment shape '" + shape + "'");
            }
            p.segments.push_back(s);
        } else if (tag == "filter_tau") {
            double tau = 0.0;
            if (!(ls >> tau))
                throw config_error(where + ": malformed filter_tau record");
            p.filter_tau = tau;
        } else {
            throw config_error(where + ": unknown record '" + tag + "'");
        }
    }
    check_profile(p);
    return p;
}

inline DriveProfile load_drive_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open drive file: " + path);
    return load_drive(in, path);
}

} // namespace gainswitch
