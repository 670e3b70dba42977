#pragma once

#include "jstpc/units.hpp"
#include "jstpc/core_model.hpp"
#include "jstpc/hex_lattice.hpp"
#include "jstpc/asymptotic.hpp"
#include "jstpc/link_planner.hpp"
#include "jstpc/scheduler.hpp"
#include "jstpc/cell_grid.hpp"
#include "jstpc/trace.hpp"
#include "jstpc/metrics.hpp"
#include "jstpc/mac_sim.hpp"
#include "jstpc/csma.hpp"
#include "jstpc/scenario_io.hpp"
