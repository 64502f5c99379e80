#pragma once

// Umbrella header for the heterogeneous-memory multi-task inference model.

#include "hmasim/block.hpp"
#include "hmasim/fixed_point.hpp"
#include "hmasim/footprint.hpp"
#include "hmasim/memory_tech.hpp"
#include "hmasim/model.hpp"
#include "hmasim/perf.hpp"
#include "hmasim/provision.hpp"
#include "hmasim/pruning.hpp"
#include "hmasim/scenario_io.hpp"
#include "hmasim/sparse.hpp"
#include "hmasim/tensor.hpp"
#include "hmasim/version.hpp"
