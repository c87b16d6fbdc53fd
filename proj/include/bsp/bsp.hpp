#pragma once

#include "bsp/belief.hpp"
#include "bsp/constraints.hpp"
#include "bsp/csv.hpp"
#include "bsp/execution_risk.hpp"
#include "bsp/importance.hpp"
#include "bsp/model.hpp"
#include "bsp/obstacle.hpp"
#include "bsp/operators.hpp"
#include "bsp/planner.hpp"
#include "bsp/random.hpp"
#include "bsp/scenario.hpp"
#include "bsp/scenario_io.hpp"
#include "bsp/sim.hpp"
#include "bsp/types.hpp"
