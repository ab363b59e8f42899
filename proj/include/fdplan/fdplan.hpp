#pragma once

#include "fdplan/approx.hpp"
#include "fdplan/cross_check.hpp"
#include "fdplan/formulation.hpp"
#include "fdplan/log.hpp"
#include "fdplan/lp.hpp"
#include "fdplan/milp.hpp"
#include "fdplan/model.hpp"
#include "fdplan/plan.hpp"
#include "fdplan/planner.hpp"
#include "fdplan/retuner.hpp"
#include "fdplan/scenario_io.hpp"
#include "fdplan/simplex.hpp"
#include "fdplan/validate.hpp"
