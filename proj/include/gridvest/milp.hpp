#pragma once

#include "gridvest/milp/branch_and_bound.hpp"
#include "gridvest/milp/lp_format.hpp"
#include "gridvest/milp/model.hpp"
#include "gridvest/milp/simplex.hpp"
#include "gridvest/milp/verify.hpp"
