#pragma once

#include "isac/conic/cbf.hpp"
#include "isac/conic/cones.hpp"
#include "isac/conic/ipm.hpp"
#include "isac/conic/program.hpp"
#include "isac/conic/scaling.hpp"
