#pragma once

#include <stdexcept>
#include <string>

namespace gainswitch {

// Invalid user-supplied configuration: bad parameter values, malformed
// files, out-of-range arguments. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation failed numerically (integrator blow-up, unusable data).
// Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Waveform has no usable structure (constant signal, no detectable peak).
class degenerate_waveform : public numeric_error {
public:
    using numeric_error::numeric_error;
};

// Two waveforms share too little support after alignment.
class no_overlap : public numeric_error {
public:
    using numeric_error::numeric_error;
};

} // namespace gainswitch
