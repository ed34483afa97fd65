// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eixgnn/concepts.hpp"
#include "eixgnn/divergence.hpp"
#include "eixgnn/errors.hpp"
#include "eixgnn/explain.hpp"
#include "eixgnn/fixtures.hpp"
#include "eixgnn/global_order.hpp"
#include "eixgnn/graph.hpp"
#include "eixgnn/graph_io.hpp"
#include "eixgnn/metrics.hpp"
#include "eixgnn/model.hpp"
#include "eixgnn/shapley.hpp"
