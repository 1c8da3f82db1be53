#pragma once

// Umbrella header for the SFQ pulse-sequence library.

#include "sfq/core.hpp"
#include "sfq/io.hpp"
#include "sfq/metrics.hpp"
#include "sfq/open_system.hpp"
#include "sfq/optimizer.hpp"
#include "sfq/propagator.hpp"
#include "sfq/schedule.hpp"
#include "sfq/spectrum.hpp"
#include "sfq/transmon.hpp"
