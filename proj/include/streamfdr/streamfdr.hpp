#pragma once

#include "streamfdr/csv.hpp"
#include "streamfdr/detector.hpp"
#include "streamfdr/generator.hpp"
#include "streamfdr/metrics.hpp"
#include "streamfdr/multiple_testing.hpp"
#include "streamfdr/prds.hpp"
#include "streamfdr/pvalues.hpp"
#include "streamfdr/rational.hpp"
#include "streamfdr/rng.hpp"
#include "streamfdr/scoring.hpp"
