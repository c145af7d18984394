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


#include "prspider/estimator.hpp"

#include <stdexcept>

namespace prspider {

EstimatorState spider_update(const EstimatorState& state, IfoOracle& oracle,
                             const ParamVector& x_curr, std::size_t batch, RngStream& rng) {
  if (batch == 0) throw std::invalid_argument("spider_update: batch must be >= 1");
  if (state.v.dim() != x_curr.dim() || state.x_prev.dim() != x_curr.dim()) {
    throw std::invalid_argument("spider_update: dimension mismatch");
  }

  MeanAccumulator correction(x_curr.dim());
  for (std::size_t b = 0; b < batch; ++b) {
    const SampleId xi = oracle.draw(rng);
    const ParamVector g_curr = oracle.stochastic_gradient(x_curr, xi);
    const ParamVector g_prev = oracle.stochastic_gradient(state.x_prev, xi);
    correction.add(difference(g_curr, g_prev));
  }

  EstimatorState next;
  next.v = state.v;
  axpy_inplace(next.v, 1.0, correction.mean());
  next.x_prev = x_curr;
  next.t = state.t + 1;
  return next;
}

std::size_t tau(std::size_t ell, std::size_t period) {
  if (period == 0) throw std::invalid_argument("tau: period must be >= 1");
  const std::size_t r = ell % period;
  if (r == 0) return ell;
  return ell - r;
}

bool is_averaging_step(std::size_t t, std::size_t period) {
  if (period == 0) throw std::invalid_argument("is_averaging_step: period must be >= 1");
  return t % period == 0;
}

}  // namespace prspider
