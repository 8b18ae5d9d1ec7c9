#pragma once

// Umbrella header for the gain-switched laser simulation and
// signal/decoy indistinguishability toolkit.

#include "gainswitch/analytic.hpp"
#include "gainswitch/decoy_qkd.hpp"
#include "gainswitch/drive_profile.hpp"
#include "gainswitch/ecdf.hpp"
#include "gainswitch/errors.hpp"
#include "gainswitch/ks_test.hpp"
#include "gainswitch/laser_params.hpp"
#include "gainswitch/pulse_analysis.hpp"
#include "gainswitch/rate_solver.hpp"
#include "gainswitch/units.hpp"
#include "gainswitch/waveform.hpp"
