#pragma once

#include "spg/error.hpp"
#include "spg/penalty.hpp"
#include "spg/linalg.hpp"
#include "spg/smoothing.hpp"
#include "spg/losses.hpp"
#include "spg/fista.hpp"
#include "spg/solver.hpp"
#include "spg/multivariate.hpp"
#include "spg/fobos.hpp"
#include "spg/simulate.hpp"
#include "spg/bench.hpp"
#include "spg/io.hpp"
