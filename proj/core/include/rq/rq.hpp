#pragma once

#include "rq/rv.hpp"
#include "rq/solvers.hpp"
#include "rq/quadrangle.hpp"
#include "rq/catalog.hpp"
#include "rq/divergence.hpp"
#include "rq/dual.hpp"
#include "rq/regression.hpp"
#include "rq/robust.hpp"
