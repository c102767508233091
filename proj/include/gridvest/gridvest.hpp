#pragma once

#include "gridvest/cashflow.hpp"
#include "gridvest/catalog.hpp"
#include "gridvest/cli.hpp"
#include "gridvest/config.hpp"
#include "gridvest/csv.hpp"
#include "gridvest/error.hpp"
#include "gridvest/igdt.hpp"
#include "gridvest/milp.hpp"
#include "gridvest/planner.hpp"
#include "gridvest/pv_model.hpp"
#include "gridvest/report.hpp"
#include "gridvest/scenario.hpp"
#include "gridvest/time_grid.hpp"
