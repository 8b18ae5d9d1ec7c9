#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gainswitch/drive_profile.hpp"

using namespace gainswitch;

TEST_CASE("step profile levels and half-open boundaries") {
    const auto p = step_profile(0.0, 30e-3, 0.0, 1.5e-9, 3e-9);
    CHECK(p.current_at(0.0) == 30e-3);
    CHECK(p.current_at(0.75e-9) == 30e-3);
    CHECK(p.current_at(1.5e-9) == 0.0);      // off exactly at t_off
    CHECK(p.current_at(1.5e-9 - 1e-12) == 30e-3);
    CHECK(p.current_at(3e-9) == 0.0);

    const auto flat = step_profile(10e-3, 10e-3, 1e-9, 2e-9, 3e-9);
    for (double t : {0.0, 0.5e-9, 1e-9, 1.9e-9, 2e-9, 3e-9})
        CHECK(flat.current_at(t) == 10e-3);

    CHECK_THROWS_AS(step_profile(0.0, 1.0, 2e-9, 1e-9, 3e-9), config_error);
}

TEST_CASE("gain-switch profile carries bias plus one perturbation") {
    const auto p = gain_switch_profile(13e-3, 6.0, 5e-9, 2e-12, 10e-9);
    CHECK(p.current_at(0.0) == 13e-3);
    CHECK(p.current_at(5e-9) == 6.0);
    CHECK(p.current_at(5e-9 + 1e-12) == 6.0);
    CHECK(p.current_at(5e-9 + 2e-12) == 13e-3);
    CHECK(p.current_at(10e-9) == 13e-3);

    const auto flat = gain_switch_profile(13e-3, 13e-3, 5e-9, 2e-12, 10e-9);
    CHECK(flat.current_at(5e-9 + 1e-12) == 13e-3);

    CHECK_THROWS_WITH_AS(gain_switch_profile(13e-3, 6.0, 9.999e-9, 2e-12, 10e-9),
                         doctest::Contains("past t_end"), config_error);
}

TEST_CASE("ramp segments interpolate linearly") {
    DriveProfile p;
    p.segments.push_back({0.0, 1e-9, SegmentShape::kRamp, 0.0, 20e-3});
    p.segments.push_back({1e-9, 2e-9, SegmentShape::kConstant, 20e-3, 20e-3});
    check_profile(p);
    CHECK(p.current_at(0.5e-9) == doctest::Approx(10e-3).epsilon(1e-12));
    CHECK(p.current_at(2e-9) == 20e-3);
    CHECK_THROWS_AS(p.current_at(2.1e-9), config_error);
    CHECK_THROWS_AS(p.current_at(-1e-12), config_error);
}

TEST_CASE("low-pass filter holds constants fixed") {
    auto p = apply_filter(step_profile(5e-3, 5e-3, 1e-9, 2e-9, 4e-9), 100e-12);
    const auto trace = lowpass_response(p, 1e-12, 4000);
    for (const double v : trace)
        CHECK(v == doctest::Approx(5e-3).epsilon(1e-12));
}

TEST_CASE("low-pass step response reaches 1 - 1/e after one tau") {
    const double tau = 100e-12, dt = 1e-12;
    auto p = apply_filter(step_profile(2e-3, 12e-3, 1e-9, 3e-9, 4e-9), tau);
    const auto trace = lowpass_response(p, dt, 2000);
    const std::size_t idx = std::size_t((1e-9 + tau) / dt);
    const double rise = (trace[idx] - 2e-3) / 10e-3;
    CHECK(rise == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("degenerate filter tau passes the input through") {
    const double dt = 1e-12;
    auto p = apply_filter(step_profile(0.0, 10e-3, 1e-9, 3e-9, 4e-9), dt / 100.0);
    const auto trace = lowpass_response(p, dt, 4000);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double expect = p.current_at(k * dt > 4e-9 ? 4e-9 : k * dt);
        if (k * dt > 1e-9 + dt && (k * dt < 3e-9 || k * dt > 3e-9 + dt))
            CHECK(trace[k] == doctest::Approx(expect).epsilon(0.01));
    }
}

TEST_CASE("low-pass preserves pulse charge") {
    // pulse fully contained in the window, long settle after it
    const double tau = 50e-12, dt = 1e-12, t_end = 8e-9;
    auto p = apply_filter(step_profile(0.0, 40e-3, 1e-9, 2e-9, t_end), tau);
    const std::size_t steps = std::size_t(t_end / dt);
    const auto filtered = lowpass_response(p, dt, steps);
    double raw_sum = 0.0, filt_sum = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double w = (k == 0 || k == steps) ? 0.5 : 1.0; // trapezoid
        raw_sum += w * p.current_at(k * dt);
        filt_sum += w * filtered[k];
    }
    CHECK(filt_sum == doctest::Approx(raw_sum).epsilon(0.005));
}

TEST_CASE("current_at is total and deterministic on random profiles") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        DriveProfile p;
        double t = 0.0;
        for (int seg = 0; seg < 6; ++seg) {
            const double dur = 0.1e-9 + u(rng) * 1e-9;
            const double lo = u(rng) * 50e-3, hi = u(rng) * 50e-3;
            p.segments.push_back({t, t + dur,
                                  u(rng) < 0.5 ? SegmentShape::kConstant : SegmentShape::kRamp,
                                  lo, u(rng) < 0.5 ? lo : hi});
            if (p.segments.back().shape == SegmentShape::kConstant)
                p.segments.back().level_end = p.segments.back().level_start;
            t += dur;
        }
        check_profile(p);
        for (int probe = 0; probe < 100; ++probe) {
            const double tp = u(rng) * p.t_end();
            const double a = p.current_at(tp);
            CHECK(std::isfinite(a));
            CHECK(a >= 0.0);
            CHECK(p.current_at(tp) == a);
        }
    }
}

TEST_CASE("drive file loads segments and filter") {
    std::istringstream file(
        "# two-level drive\n"
        "segment 0 5e-9 constant 0.013\n"
        "segment 5e-9 5.002e-9 constant 6.0\n"
        "segment 5.002e-9 2e-8 ramp 0.013 0.015\n"
        "filter_tau 2e-10\n");
    const auto p = load_drive(file);
    CHECK(p.segments.size() == 3);
    CHECK(p.filter_tau.has_value());
    CHECK(*p.filter_tau == 2e-10);
    CHECK(p.current_at(1e-9) == 0.013);
    CHECK(p.current_at(5.001e-9) == 6.0);

    std::istringstream gap("segment 0 1e-9 constant 0.01\nsegment 2e-9 3e-9 constant 0.01\n");
    CHECK_THROWS_WITH_AS(load_drive(gap), doctest::Contains("contiguous"), config_error);

    std::istringstream junk("segment 0 1e-9 wobble 0.01\n");
    CHECK_THROWS_WITH_AS(load_drive(junk), doctest::Contains(":1"), config_error);
}
