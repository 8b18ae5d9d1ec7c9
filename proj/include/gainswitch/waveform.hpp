#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gainswitch/errors.hpp"

namespace gainswitch {

// Uniformly sampled amplitude record (simulated photon density or an
// ingested oscilloscope trace). Amplitude units are arbitrary but linear.
struct Waveform {
    std::vector<double> t; // [s], strictly increasing, uniform spacing
    std::vector<double> v;

    std::size_t size() const { return t.size(); }
    double dt() const { return size() > 1 ? (t.back() - t.front()) / double(size() - 1) : 0.0; }
};

inline constexpr std::size_t kMinWaveformSamples = 8;

inline Waveform make_waveform(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size())
        throw config_error("waveform time/value column lengths differ");
    if (t.size() < kMinWaveformSamples)
        throw config_error("waveform needs at least " +
                           std::to_string(kMinWaveformSamples) + " samples, got " +
                           std::to_string(t.size()));
    const double step = (t.back() - t.front()) / double(t.size() - 1);
    if (!(step > 0.0))
        throw config_error("waveform time axis not increasing");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(v[i]))
            throw config_error("waveform contains non-finite samples");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw config_error("waveform time axis not strictly increasing");
        if (i > 0 && std::abs((t[i] - t[i - 1]) - step) > 1e-3 * step)
            throw config_error("waveform sampling not uniform");
    }
    return Waveform{std::move(t), std::move(v)};
}

namespace detail {

inline bool split_fields(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\t', ' ');
    std::replace(cleaned.begin(), cleaned.end(), '\r', ' ');
    std::istringstream ls(cleaned);
    std::string f;
    while (ls >> f) out.push_back(f);
    return !out.empty();
}

inline bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
}

} // namespace detail

// Two-column time,value CSV with an optional header, comma or whitespace
// delimited, '#' comments. Also accepts this tool's own trace CSVs
// (header t_s,current_A,carrier_per_m3,photon_per_m3), extracting the
// photon-density column. Parse errors name the offending line.
inline Waveform read_waveform_csv(std::istream& in, const std::string& origin = "<stream>") {
    std::vector<double> t, v;
    std::string line;
    std::vector<std::string> fields;
    int lineno = 0;
    bool seen_content = false;
    std::size_t value_column = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (!detail::split_fields(line, fields)) continue;
        double probe;
        if (!seen_content && !detail::parse_double(fields[0], probe)) {
            // header row; trace CSVs carry the photon column last
            for (std::size_t i = 0; i < fields.size(); ++i)
                if (fields[i] == "photon_per_m3") value_column = i;
            seen_content = true;
            continue;
        }
        seen_content = true;
        if (fields.size() < value_column + 1)
            throw config_error(origin + ": line " + std::to_string(lineno) +
                               ": expected at least " + std::to_string(value_column + 1) +
                               " columns, got " + std::to_string(fields.size()));
        double ti, vi;
        if (!detail::parse_double(fields[0], ti) ||
            !detail::parse_double(fields[value_column], vi))
            throw config_error(origin + ": line " + std::to_string(lineno) +
                               ": cannot parse numeric fields '" + line + "'");
        t.push_back(ti);
        v.push_back(vi);
    }
    if (t.empty())
        throw config_error(origin + ": no data rows");
    return make_waveform(std::move(t), std::move(v));
}

inline Waveform read_waveform_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open waveform file: " + path);
    return read_waveform_csv(in, path);
}

// Linear interpolation onto n uniformly spaced points spanning the
// waveform's full time window.
inline Waveform resample_uniform(const Waveform& w, std::size_t n) {
    if (n < kMinWaveformSamples)
        throw config_error("resample target below " +
                           std::to_string(kMinWaveformSamples) + " samples");
    std::vector<double> t(n), v(n);
    const double t0 = w.t.front(), t1 = w.t.back();
    const double step = (t1 - t0) / double(n - 1);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = (i + 1 == n) ? t1 : t0 + step * double(i);
        while (j + 2 < w.t.size() && w.t[j + 1] <= ti) ++j;
        const double u = (ti - w.t[j]) / (w.t[j + 1] - w.t[j]);
        t[i] = ti;
        v[i] = w.v[j] + (w.v[j + 1] - w.v[j]) * std::clamp(u, 0.0, 1.0);
    }
    return Waveform{std::move(t), std::move(v)};
}

// Crop to samples with t in [t_from, t_to], with half-a-sample slack so
// window edges landing on sample times are kept regardless of rounding.
inline Waveform crop(const Waveform& w, double t_from, double t_to) {
    const double slack = 0.5 * w.dt();
    std::vector<double> t, v;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.t[i] >= t_from - slack && w.t[i] <= t_to + slack) {
            t.push_back(w.t[i]);
            v.push_back(w.v[i]);
        }
    }
    return make_waveform(std::move(t), std::move(v));
}

} // namespace gainswitch
