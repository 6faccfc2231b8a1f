#pragma once

// Umbrella header for the whole library.

#include "linkpred/baselines.hpp"
#include "linkpred/dropout_analysis.hpp"
#include "linkpred/evaluation.hpp"
#include "linkpred/graph.hpp"
#include "linkpred/io.hpp"
#include "linkpred/model.hpp"
#include "linkpred/numerics.hpp"
#include "linkpred/presets.hpp"
#include "linkpred/training.hpp"
