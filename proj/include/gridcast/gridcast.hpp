#ifndef GRIDCAST_GRIDCAST_HPP
#define GRIDCAST_GRIDCAST_HPP

#include "gridcast/backtest.hpp"
#include "gridcast/baselines.hpp"
#include "gridcast/bspline.hpp"
#include "gridcast/common.hpp"
#include "gridcast/config.hpp"
#include "gridcast/csv.hpp"
#include "gridcast/ensemble.hpp"
#include "gridcast/features.hpp"
#include "gridcast/gbt.hpp"
#include "gridcast/kan.hpp"
#include "gridcast/metrics.hpp"
#include "gridcast/report.hpp"
#include "gridcast/serialize.hpp"
#include "gridcast/synth.hpp"
#include "gridcast/timeseries.hpp"
#include "gridcast/transform.hpp"

#endif  // GRIDCAST_GRIDCAST_HPP
