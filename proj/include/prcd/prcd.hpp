#pragma once

#include "prcd/analysis.hpp"
#include "prcd/error.hpp"
#include "prcd/gebp.hpp"
#include "prcd/problem.hpp"
#include "prcd/prox.hpp"
#include "prcd/prox_mapping.hpp"
#include "prcd/rng.hpp"
#include "prcd/sampling.hpp"
#include "prcd/smooth.hpp"
#include "prcd/solver.hpp"
#include "prcd/structure.hpp"
#include "prcd/worker_pool.hpp"
