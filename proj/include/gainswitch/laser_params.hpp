#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gainswitch/errors.hpp"
#include "gainswitch/units.hpp"

namespace gainswitch {

// Device and material constants of the carrier/photon rate equations,
// strict SI units throughout. The defaults are a calibrated set for a
// red quantum-well diode with threshold current ~18.4 mA; see
// data/default_params.txt for the same values in file form.
struct LaserParams {
    double gamma = 0.25;            // mode confinement factor, (0,1]
    double a_gain = 2.0e-12;        // tangential gain coefficient [m^3/s]
    double n_transparency = 1.0e24; // carrier density at transparency [m^-3]
    double epsilon = 0.0;           // gain compression factor [m^3]
    double beta = 1.0e-6;           // spontaneous-emission coupling, (0,1]
    double tau_p = 2.0e-12;         // photon lifetime [s]
    double tau_nr = 3.0e-9;         // non-radiative carrier lifetime [s]
    double tau_mode = 1.5e-9;       // radiative lifetime [s]
    double volume = 5.74e-17;       // active-region volume [m^3]
    double thickness = 1.0e-7;      // active-region thickness [m]
    double q_charge = kElementaryCharge; // elementary charge [C]

    // Derived quantities, populated by validated().
    double tau_n = 0.0;        // total carrier lifetime [s]
    double n_threshold = 0.0;  // threshold carrier density [m^-3]
    double i_threshold = 0.0;  // threshold current [A]
};

// 1/tau_n = 1/tau_nr + 1/tau_mode
inline double carrier_lifetime(const LaserParams& p) {
    return 1.0 / (1.0 / p.tau_nr + 1.0 / p.tau_mode);
}

// Carrier density at which modal gain balances cavity loss.
inline double threshold_carrier_density(const LaserParams& p) {
    return p.n_transparency + 1.0 / (p.gamma * p.a_gain * p.tau_p);
}

// Steady-state current needed to hold the threshold carrier density.
inline double threshold_current(const LaserParams& p) {
    return p.q_charge * p.volume * threshold_carrier_density(p) / carrier_lifetime(p);
}

// Every violated invariant, one message per violation. Empty means valid.
inline std::vector<std::string> check_params(const LaserParams& p) {
    std::vector<std::string> bad;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            bad.push_back(std::string("non-positive field: ") + name);
    };
    positive(p.gamma, "gamma");
    positive(p.a_gain, "a_gain");
    positive(p.n_transparency, "n_transparency");
    positive(p.beta, "beta");
    positive(p.tau_p, "tau_p");
    positive(p.tau_nr, "tau_nr");
    positive(p.tau_mode, "tau_mode");
    positive(p.volume, "volume");
    positive(p.thickness, "thickness");
    positive(p.q_charge, "q_charge");
    if (!(p.epsilon >= 0.0) || !std::isfinite(p.epsilon))
        bad.push_back("non-positive field: epsilon (must be >= 0)");
    if (p.gamma > 1.0)
        bad.push_back("gamma out of range (0,1]");
    if (p.beta > 1.0)
        bad.push_back("beta out of range (0,1]");
    if (bad.empty()) {
        const double tn = carrier_lifetime(p);
        const double shortest = std::min(p.tau_nr, p.tau_mode);
        if (!(tn < shortest * (1.0 + 1e-12)) || !(tn > 0.0))
            bad.push_back("inconsistent lifetimes: derived tau_n not below min(tau_nr, tau_mode)");
    }
    return bad;
}

// Returns the set with tau_n, n_threshold and i_threshold populated, or
// throws config_error listing every violated invariant. Idempotent.
inline LaserParams validated(LaserParams p) {
    const auto bad = check_params(p);
    if (!bad.empty()) {
        std::string msg = "invalid laser parameters:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw config_error(msg);
    }
    p.tau_n = carrier_lifetime(p);
    p.n_threshold = threshold_carrier_density(p);
    p.i_threshold = threshold_current(p);
    return p;
}

// The calibrated default set, validated.
inline LaserParams default_params() { return validated(LaserParams{}); }

// Flat "key = value" text, one field per line, '#' comments. Values are
// strict SI numbers. Keys not present keep their defaults; unknown keys
// are an error. The result is validated.
inline LaserParams load_params(std::istream& in, const std::string& origin = "<stream>") {
    LaserParams p;
    std::map<std::string, double LaserParams::*> fields = {
        {"gamma", &LaserParams::gamma},
        {"a_gain", &LaserParams::a_gain},
        {"n_transparency", &LaserParams::n_transparency},
        {"epsilon", &LaserParams::epsilon},
        {"beta", &LaserParams::beta},
        {"tau_p", &LaserParams::tau_p},
        {"tau_nr", &LaserParams::tau_nr},
        {"tau_mode", &LaserParams::tau_mode},
        {"volume", &LaserParams::volume},
        {"thickness", &LaserParams::thickness},
        {"q_charge", &LaserParams::q_charge},
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key, eq, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue; // blank line
        if (!(ls >> eq) || eq != "=" || !(ls >> value))
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
        const auto it = fields.find(key);
        if (it == fields.end())
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": unknown parameter '" + key + "'");
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": cannot parse value '" + value + "' for '" + key + "'");
        p.*(it->second) = v;
    }
    return validated(p);
}

inline LaserParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open parameter file: " + path);
    return load_params(in, path);
}

} // namespace gainswitch
