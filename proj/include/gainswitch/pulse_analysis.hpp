#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

#include "gainswitch/errors.hpp"
#include "gainswitch/waveform.hpp"

namespace gainswitch {

struct Peak {
    double t = 0.0;
    double amplitude = 0.0;
    double prominence = 0.0;
    std::size_t index = 0;
};

// Local maxima with topographic prominence of at least
// min_prominence_frac x global maximum, ordered by time. Plateau tops
// count once, at the plateau centre.
inline std::vector<Peak> detect_peaks(const Waveform& w, double min_prominence_frac) {
    if (!(min_prominence_frac > 0.0 && min_prominence_frac < 1.0))
        throw config_error("prominence fraction must be in (0,1)");
    const auto& v = w.v;
    const std::size_t n = v.size();
    const double vmax = *std::max_element(v.begin(), v.end());
    const double vmin = *std::min_element(v.begin(), v.end());
    if (!(vmax > vmin))
        throw degenerate_waveform("constant waveform has no peaks");

    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < n;) {
        if (v[i] > v[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && v[j + 1] == v[i]) ++j;
            if (j + 1 < n && v[j + 1] < v[i])
                candidates.push_back((i + j) / 2);
            i = j + 1;
        } else {
            ++i;
        }
    }

    const double floor_value = min_prominence_frac * vmax;
    std::vector<Peak> peaks;
    for (const std::size_t idx : candidates) {
        const double height = v[idx];
        // walk left and right to the nearest strictly higher ground,
        // tracking the lowest saddle on each side
        double left_min = height;
        for (std::size_t i = idx; i-- > 0;) {
            if (v[i] > height) break;
            left_min = std::min(left_min, v[i]);
        }
        double right_min = height;
        for (std::size_t i = idx + 1; i < n; ++i) {
            if (v[i] > height) break;
            right_min = std::min(right_min, v[i]);
        }
        const double prominence = height - std::max(left_min, right_min);
        if (prominence >= floor_value)
            peaks.push_back({w.t[idx], height, prominence, idx});
    }
    return peaks;
}

struct PulseFeatures {
    Peak primary;
    std::optional<Peak> secondary;       // largest peak after the primary
    double peak_difference = 0.0;        // primary - secondary (primary if none)
    std::optional<double> turn_on_delay; // drive edge to primary peak [s]
};

inline PulseFeatures pulse_features(const Waveform& w, std::optional<double> drive_edge_t,
                                    double min_prominence_frac) {
    const auto peaks = detect_peaks(w, min_prominence_frac);
    if (peaks.empty())
        throw degenerate_waveform("no peaks above the prominence floor");

    PulseFeatures out;
    std::size_t primary_at = 0;
    for (std::size_t i = 1; i < peaks.size(); ++i)
        if (peaks[i].amplitude > peaks[primary_at].amplitude) primary_at = i;
    out.primary = peaks[primary_at];

    for (std::size_t i = primary_at + 1; i < peaks.size(); ++i)
        if (!out.secondary || peaks[i].amplitude > out.secondary->amplitude)
            out.secondary = peaks[i];

    out.peak_difference =
        out.primary.amplitude - (out.secondary ? out.secondary->amplitude : 0.0);
    if (drive_edge_t)
        out.turn_on_delay = out.primary.t - *drive_edge_t;
    return out;
}

// Rescale so the pre-pulse quiescent level (median of the first 5% of
// samples) maps to 0 and the maximum maps to 1. Idempotent.
inline Waveform normalize_amplitude(const Waveform& w) {
    const auto& v = w.v;
    const double vmax = *std::max_element(v.begin(), v.end());
    const double vmin = *std::min_element(v.begin(), v.end());
    if (!(vmax > vmin))
        throw degenerate_waveform("constant waveform cannot be normalized");

    std::size_t head = std::max<std::size_t>(1, v.size() / 20);
    std::vector<double> lead(v.begin(), v.begin() + head);
    std::sort(lead.begin(), lead.end());
    const double baseline = head % 2 ? lead[head / 2]
                                     : 0.5 * (lead[head / 2 - 1] + lead[head / 2]);
    if (!(vmax > baseline))
        throw degenerate_waveform("baseline level is not below the waveform maximum");

    Waveform out;
    out.t = w.t;
    out.v.resize(v.size());
    const double scale = 1.0 / (vmax - baseline);
    for (std::size_t i = 0; i < v.size(); ++i)
        out.v[i] = (v[i] - baseline) * scale;
    return out;
}

// Shift b by an integer number of samples so both primary peaks (global
// maxima) coincide, then crop both to the common window. The returned
// waveforms share a's time axis and have equal sample counts.
inline std::pair<Waveform, Waveform> align_primary_peaks(const Waveform& a,
                                                         const Waveform& b) {
    const double dta = a.dt(), dtb = b.dt();
    if (std::abs(dta - dtb) > 1e-6 * dta)
        throw config_error("cannot align waveforms with different sampling periods");

    const auto peak_index = [](const Waveform& w) {
        return std::size_t(std::max_element(w.v.begin(), w.v.end()) - w.v.begin());
    };
    const std::ptrdiff_t shift =
        std::ptrdiff_t(peak_index(a)) - std::ptrdiff_t(peak_index(b));

    const std::size_t start_a = std::size_t(std::max<std::ptrdiff_t>(0, shift));
    const std::size_t start_b = std::size_t(std::max<std::ptrdiff_t>(0, -shift));
    const std::size_t len = std::min(a.size() - start_a, b.size() - start_b);
    if (len < kMinWaveformSamples)
        throw no_overlap("aligned waveforms share fewer than " +
                         std::to_string(kMinWaveformSamples) + " samples");

    Waveform oa, ob;
    oa.t.assign(a.t.begin() + start_a, a.t.begin() + start_a + len);
    oa.v.assign(a.v.begin() + start_a, a.v.begin() + start_a + len);
    ob.t = oa.t; // b re-timed onto a's axis
    ob.v.assign(b.v.begin() + start_b, b.v.begin() + start_b + len);
    return {std::move(oa), std::move(ob)};
}

} // namespace gainswitch
