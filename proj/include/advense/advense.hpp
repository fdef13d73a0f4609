#pragma once

#include "advense/config.hpp"
#include "advense/correlation.hpp"
#include "advense/detectors.hpp"
#include "advense/ensemble.hpp"
#include "advense/error.hpp"
#include "advense/io.hpp"
#include "advense/metrics.hpp"
#include "advense/pairs.hpp"
#include "advense/ranking.hpp"
#include "advense/synthetic.hpp"
#include "advense/ued.hpp"
#include "advense/weighting.hpp"
