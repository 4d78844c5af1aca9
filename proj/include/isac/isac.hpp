#pragma once

#include "isac/baselines.hpp"
#include "isac/channel.hpp"
#include "isac/metrics.hpp"
#include "isac/scenario.hpp"
#include "isac/scenario_io.hpp"
#include "isac/solve.hpp"
