#pragma once

#include "brainnet/consistency.hpp"
#include "brainnet/core.hpp"
#include "brainnet/eigensolve.hpp"
#include "brainnet/error.hpp"
#include "brainnet/graph_metrics.hpp"
#include "brainnet/io.hpp"
#include "brainnet/kmeans.hpp"
#include "brainnet/network.hpp"
#include "brainnet/parallel.hpp"
#include "brainnet/parcellate.hpp"
#include "brainnet/phantom.hpp"
#include "brainnet/rng.hpp"
#include "brainnet/spatial_graph.hpp"
#include "brainnet/spectral_metrics.hpp"
#include "brainnet/stats.hpp"
#include "brainnet/svm.hpp"
