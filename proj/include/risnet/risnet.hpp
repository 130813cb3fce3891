#pragma once

#include "risnet/errors.hpp"
#include "risnet/model.hpp"
#include "risnet/quadrature.hpp"
#include "risnet/laplace.hpp"
#include "risnet/coverage.hpp"
#include "risnet/sensitivity.hpp"
#include "risnet/planner.hpp"
#include "risnet/mc.hpp"
