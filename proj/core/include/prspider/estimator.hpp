// Copyright 2026 The prspider Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>

#include "prspider/numerics.hpp"
#include "prspider/problems.hpp"
#include "prspider/rng.hpp"

namespace prspider {

/// Recursive gradient tracker of one worker inside an epoch.
struct EstimatorState {
  ParamVector v;       // current estimate v_{i,t}
  ParamVector x_prev;  // iterate the estimate was last evaluated at
  std::size_t t = 0;   // inner-iteration index
};

/// One SPIDER step: draws a batch of `batch` i.i.d. samples and returns
///   v + (1/batch) sum_xi [grad f_i(x_curr; xi) - grad f_i(x_prev; xi)]
/// with x_prev <- x_curr and t <- t + 1. Both gradients of a term share the
/// sample. Costs 2 * batch IFO calls.
EstimatorState spider_update(const EstimatorState& state, IfoOracle& oracle,
                             const ParamVector& x_curr, std::size_t batch, RngStream& rng);

/// Most recent averaging index at or before ell: ell itself when it is a
/// multiple of period, else the largest multiple strictly below it.
std::size_t tau(std::size_t ell, std::size_t period);

/// Whether the in-epoch averaging fires at inner iteration t.
bool is_averaging_step(std::size_t t, std::size_t period);

}  // namespace prspider
