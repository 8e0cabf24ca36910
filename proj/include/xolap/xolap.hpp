#pragma once

// Umbrella header: the whole library.

#include "xolap/bench.hpp"
#include "xolap/decimal.hpp"
#include "xolap/diagnostics.hpp"
#include "xolap/error.hpp"
#include "xolap/generate.hpp"
#include "xolap/model.hpp"
#include "xolap/normalize.hpp"
#include "xolap/qbs.hpp"
#include "xolap/query.hpp"
#include "xolap/xml.hpp"
