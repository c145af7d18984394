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


#include "prspider/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace prspider {
namespace {

void require_same_dim(const ParamVector& x, const ParamVector& y, const char* op) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(x.dim()) + " vs " +
                                std::to_string(y.dim()) + ")");
  }
}

}  // namespace

void MeanAccumulator::add(const ParamVector& x) {
  require_same_dim(mean_, x, "MeanAccumulator::add");
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  auto m = mean_.values();
  auto v = x.values();
  if (count_ == 1) {
    std::copy(v.begin(), v.end(), m.begin());
    return;
  }
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] += (v[k] - m[k]) * inv;
  }
}

const ParamVector& MeanAccumulator::mean() const {
  if (count_ == 0) throw std::invalid_argument("MeanAccumulator: no vectors added");
  return mean_;
}

ParamVector mean_reduce(std::span<const ParamVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("mean_reduce: empty list");
  MeanAccumulator acc(vectors.front().dim());
  for (const auto& v : vectors) acc.add(v);
  return acc.mean();
}

ParamVector axpy(const ParamVector& x, double a, const ParamVector& y) {
  ParamVector out = x;
  axpy_inplace(out, a, y);
  return out;
}

void axpy_inplace(ParamVector& x, double a, const ParamVector& y) {
  require_same_dim(x, y, "axpy");
  if (!std::isfinite(a)) throw std::invalid_argument("axpy: non-finite scalar");
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] += a * ys[k];
}

ParamVector difference(const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "difference");
  ParamVector out(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) out[k] = x[k] - y[k];
  return out;
}

double dot(const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) s += x[k] * y[k];
  return s;
}

double sq_norm(const ParamVector& x) {
  double s = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::domain_error("sq_norm: non-finite entry");
    s += v * v;
  }
  return s;
}

double sq_distance(const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "sq_distance");
  double s = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  if (!std::isfinite(s)) throw std::domain_error("sq_distance: non-finite result");
  return s;
}

bool all_finite(const ParamVector& x) noexcept {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool bitwise_equal(const ParamVector& x, const ParamVector& y) noexcept {
  if (x.dim() != y.dim()) return false;
  return x.dim() == 0 ||
         std::memcmp(x.values().data(), y.values().data(), x.dim() * sizeof(double)) == 0;
}

}  // namespace prspider
