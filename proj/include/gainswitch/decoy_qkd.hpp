#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gainswitch/errors.hpp"

namespace gainswitch {

// Detector error model. kFlatDark uses a j-independent error numerator
// (e_dark + e_det * eta) / Y_j; kStandard uses the conventional
// (0.5 Y_0 + e_det * eta_j) / Y_j with eta_j = 1 - (1-eta)^j.
enum class ErrorModel { kFlatDark, kStandard };

// Channel, detector and protocol parameters for the decoy-state key-rate
// arithmetic on weak coherent pulses.
struct DecoyLink {
    double mu_signal = 0.5;   // mean photon number of the signal state
    double mu_decoy = 0.1;    // mean photon number of the decoy state
    double y0 = 1e-5;         // dark-count yield Y_0
    double eta = 0.1;         // overall transmission/detection probability
    double e_detector = 0.01; // detector error parameter
    double e_darkcount = 5e-6;// dark-count error yield
    double q_ratio = 0.5;     // basis-sift ratio q
    double f_ec = 1.16;       // error-correction inefficiency f(E)
    int photon_cutoff = 40;   // Poisson series truncation order
    ErrorModel error_model = ErrorModel::kFlatDark;
};

inline std::vector<std::string> check_link(const DecoyLink& l) {
    std::vector<std::string> bad;
    if (!(l.mu_signal > 0.0)) bad.push_back("mu_signal must be > 0");
    if (!(l.mu_decoy >= 0.0)) bad.push_back("mu_decoy must be >= 0");
    if (l.mu_decoy == l.mu_signal) bad.push_back("mu_decoy must differ from mu_signal");
    if (!(l.y0 >= 0.0 && l.y0 <= 1.0)) bad.push_back("y0 out of [0,1]");
    if (!(l.eta >= 0.0 && l.eta <= 1.0)) bad.push_back("eta out of [0,1]");
    if (!(l.e_detector >= 0.0 && l.e_detector <= 0.5)) bad.push_back("e_detector out of [0,0.5]");
    if (!(l.e_darkcount >= 0.0 && l.e_darkcount <= 1.0)) bad.push_back("e_darkcount out of [0,1]");
    if (!(l.q_ratio > 0.0 && l.q_ratio <= 1.0)) bad.push_back("q_ratio out of (0,1]");
    if (!(l.f_ec >= 1.0)) bad.push_back("f_ec must be >= 1");
    if (l.photon_cutoff < 10) bad.push_back("photon_cutoff must be >= 10");
    return bad;
}

inline DecoyLink validated(DecoyLink l) {
    const auto bad = check_link(l);
    if (!bad.empty()) {
        std::string msg = "invalid decoy link parameters:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw config_error(msg);
    }
    return l;
}

// Poisson photon-number probability P_n = mu^n e^{-mu} / n!, evaluated in
// log space so large n stays finite.
inline double photon_prob(double mu, int n) {
    if (!(mu >= 0.0) || n < 0)
        throw config_error("photon_prob requires mu >= 0 and n >= 0");
    if (mu == 0.0)
        return n == 0 ? 1.0 : 0.0;
    return std::exp(double(n) * std::log(mu) - mu - std::lgamma(double(n) + 1.0));
}

// Probability of more than one photon in a pulse. The quadratic form
// mu^2/2 is the customary small-mu bound; exact is 1 - e^{-mu}(1 + mu).
inline double multi_photon_prob(double mu, bool exact = true) {
    if (!(mu >= 0.0))
        throw config_error("multi_photon_prob requires mu >= 0");
    if (exact)
        return -std::expm1(-mu) - mu * std::exp(-mu);
    return mu * mu / 2.0;
}

// Yield of a j-photon pulse: Y_j = 1 - (1 - Y_0)(1 - eta)^j.
inline double yield_j(double y0, double eta, int j) {
    if (!(y0 >= 0.0 && y0 <= 1.0) || !(eta >= 0.0 && eta <= 1.0) || j < 0)
        throw config_error("yield_j arguments out of range");
    return 1.0 - (1.0 - y0) * std::pow(1.0 - eta, double(j));
}

inline double overall_gain_closed_form(double mu, double y0, double eta) {
    return y0 + (1.0 - y0) * (-std::expm1(-eta * mu));
}

// Overall gain Q = sum_j P_j(mu) Y_j, truncated at the cutoff. The Poisson
// tail beyond the cutoff must be below 1e-12, and the truncated series is
// cross-checked against the closed form Y_0 + (1-Y_0)(1 - e^{-eta mu}).
inline double overall_gain(double mu, double y0, double eta, int cutoff) {
    if (cutoff < 1)
        throw config_error("photon cutoff must be >= 1");
    double q = 0.0, mass = 0.0;
    for (int j = 0; j <= cutoff; ++j) {
        const double pj = photon_prob(mu, j);
        mass += pj;
        q += pj * yield_j(y0, eta, j);
    }
    const double tail = 1.0 - mass;
    if (tail > 1e-12)
        throw config_error("photon cutoff too small: Poisson tail " +
                           std::to_string(tail) + " exceeds 1e-12");
    const double closed = overall_gain_closed_form(mu, y0, eta);
    if (std::abs(q - closed) > 1e-9)
        throw numeric_error("overall gain series disagrees with closed form");
    return q;
}

// Error rate of a j-photon detection.
inline double error_j(double y0, double eta, double e_det, double e_dark, int j,
                      ErrorModel model = ErrorModel::kFlatDark) {
    const double yj = yield_j(y0, eta, j);
    if (!(yj > 0.0))
        throw config_error("zero yield: error rate undefined for j = " + std::to_string(j));
    if (model == ErrorModel::kFlatDark)
        return (e_dark + e_det * eta) / yj;
    const double eta_j = 1.0 - std::pow(1.0 - eta, double(j));
    return (0.5 * y0 + e_det * eta_j) / yj;
}

struct QberResult {
    double eq = 0.0; // sum_j e_j Y_j P_j(mu)
    double e = 0.0;  // EQ / Q
    bool error_rate_warning = false; // some e_j exceeded 1
};

// Overall QBER: EQ = sum_j e_j Y_j P_j(mu), E = EQ/Q. The e_j * Y_j
// product is formed directly, so zero-yield terms need no special case.
inline QberResult overall_qber(const DecoyLink& link, double mu) {
    const DecoyLink l = validated(link);
    if (!(mu >= 0.0))
        throw config_error("mu must be >= 0");
    QberResult out;
    double q = 0.0;
    for (int j = 0; j <= l.photon_cutoff; ++j) {
        const double pj = photon_prob(mu, j);
        const double yj = yield_j(l.y0, l.eta, j);
        double ej_yj;
        if (l.error_model == ErrorModel::kFlatDark)
            ej_yj = l.e_darkcount + l.e_detector * l.eta;
        else
            ej_yj = 0.5 * l.y0 + l.e_detector * (1.0 - std::pow(1.0 - l.eta, double(j)));
        out.eq += ej_yj * pj;
        q += yj * pj;
        if (yj > 0.0 && ej_yj / yj > 1.0)
            out.error_rate_warning = true;
    }
    if (!(q > 0.0))
        throw config_error("overall gain is zero: QBER undefined");
    out.e = out.eq / q;
    return out;
}

// Binary Shannon entropy in bits, H2(0) = H2(1) = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw config_error("binary_entropy domain is [0,1]");
    if (p == 0.0 || p == 1.0)
        return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct KeyRateReport {
    double q_mu = 0.0;     // signal gain
    double e_mu = 0.0;     // signal QBER
    double q_mu_decoy = 0.0;
    double e_mu_decoy = 0.0;
    double y_1 = 0.0;      // single-photon yield
    double q_1 = 0.0;      // single-photon gain at mu_signal
    double e_1 = 0.0;      // single-photon error rate
    double h2_e_mu = 0.0;
    double h2_e_1 = 0.0;
    double correction_loss = 0.0;    // Q_mu f(E_mu) H2(E_mu)
    double privacy_gain = 0.0;       // Q_1 [1 - H2(e_1)]
    double secure_rate = 0.0;        // S, per pulse
    bool insecure = false;           // S < 0
    std::vector<std::string> warnings;
};

// Secure key rate S = q(-Q_mu f(E_mu) H2(E_mu) + Q_1[1 - H2(e_1)]) with
// the single-photon quantities evaluated at mu_signal. A negative S is
// reported as-is with the insecure flag set.
inline KeyRateReport key_rate(const DecoyLink& link) {
    const DecoyLink l = validated(link);
    KeyRateReport r;
    r.q_mu = overall_gain(l.mu_signal, l.y0, l.eta, l.photon_cutoff);
    if (!(r.q_mu > 0.0))
        throw config_error("signal gain is zero: key rate undefined");
    const QberResult qber = overall_qber(l, l.mu_signal);
    r.e_mu = qber.e;
    if (qber.error_rate_warning)
        r.warnings.push_back("per-photon error rate exceeds 1; model inputs unphysical");
    if (r.e_mu > 0.5)
        r.warnings.push_back("signal QBER above 0.5");

    r.q_mu_decoy = overall_gain(l.mu_decoy, l.y0, l.eta, l.photon_cutoff);
    r.e_mu_decoy = overall_qber(l, l.mu_decoy).e;

    r.y_1 = yield_j(l.y0, l.eta, 1);
    r.q_1 = r.y_1 * photon_prob(l.mu_signal, 1);
    r.e_1 = error_j(l.y0, l.eta, l.e_detector, l.e_darkcount, 1, l.error_model);
    r.h2_e_mu = binary_entropy(std::min(r.e_mu, 1.0));
    r.h2_e_1 = binary_entropy(std::min(r.e_1, 1.0));
    r.correction_loss = r.q_mu * l.f_ec * r.h2_e_mu;
    r.privacy_gain = r.q_1 * (1.0 - r.h2_e_1);
    r.secure_rate = l.q_ratio * (-r.correction_loss + r.privacy_gain);
    r.insecure = r.secure_rate < 0.0;
    return r;
}

// Link parameter file, same flat "key = value" format as the laser
// parameter file. Recognized keys match the DecoyLink field names.
inline DecoyLink load_link(std::istream& in, const std::string& origin = "<stream>") {
    DecoyLink l;
    std::map<std::string, double DecoyLink::*> fields = {
        {"mu_signal", &DecoyLink::mu_signal},
        {"mu_decoy", &DecoyLink::mu_decoy},
        {"y0", &DecoyLink::y0},
        {"eta", &DecoyLink::eta},
        {"e_detector", &DecoyLink::e_detector},
        {"e_darkcount", &DecoyLink::e_darkcount},
        {"q_ratio", &DecoyLink::q_ratio},
        {"f_ec", &DecoyLink::f_ec},
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key, eq, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (!(ls >> eq) || eq != "=" || !(ls >> value))
            throw config_error(where + ": expected 'key = value', got '" + line + "'");
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw config_error(where + ": cannot parse value '" + value + "'");
        if (key == "photon_cutoff") {
            l.photon_cutoff = int(v);
            continue;
        }
        const auto it = fields.find(key);
        if (it == fields.end())
            throw config_error(where + ": unknown link parameter '" + key + "'");
        l.*(it->second) = v;
    }
    return validated(l);
}

inline DecoyLink load_link_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open link file: " + path);
    return load_link(in, path);
}

} // namespace gainswitch
