#pragma once

/// Umbrella header for the header-only library (without the experiment layer).

#include "core.hpp"
#include "curves.hpp"
#include "distortion.hpp"
#include "jets.hpp"
#include "maps.hpp"
#include "scenarios.hpp"
#include "smooth_map.hpp"
