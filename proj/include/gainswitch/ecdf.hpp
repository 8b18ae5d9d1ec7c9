#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gainswitch/errors.hpp"

namespace gainswitch {

// Right-continuous empirical distribution function:
// F(x) = (# samples <= x) / n, stored as sorted unique values with their
// cumulative fractions.
struct Ecdf {
    std::vector<double> values;
    std::vector<double> cumulative;

    static Ecdf from_samples(std::vector<double> samples) {
        if (samples.empty())
            throw config_error("empty sample for ECDF");
        for (const double s : samples)
            if (!std::isfinite(s))
                throw config_error("ECDF sample not finite");
        std::sort(samples.begin(), samples.end());
        Ecdf e;
        const double n = double(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (i + 1 == samples.size() || samples[i + 1] != samples[i]) {
                e.values.push_back(samples[i]);
                e.cumulative.push_back(double(i + 1) / n);
            }
        }
        return e;
    }

    double operator()(double x) const {
        const auto it = std::upper_bound(values.begin(), values.end(), x);
        if (it == values.begin()) return 0.0;
        return cumulative[std::size_t(it - values.begin()) - 1];
    }
};

} // namespace gainswitch
