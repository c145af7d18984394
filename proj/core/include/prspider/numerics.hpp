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
#include <initializer_list>
#include <span>
#include <vector>

namespace prspider {

/// A point in R^d. Iterates, gradients and gradient estimates all share this
/// representation. Dimension mismatches between operands are programming
/// errors and raise std::invalid_argument.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  ParamVector(std::initializer_list<double> values) : data_(values) {}
  explicit ParamVector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t k) const { return data_[k]; }
  double& operator[](std::size_t k) { return data_[k]; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  /// Componentwise IEEE equality (so +0 == -0).
  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> data_;
};

/// Running mean over vectors added in a fixed order. The update
/// m_k = m_{k-1} + (x_k - m_{k-1}) / k leaves m unchanged when x_k == m, so
/// averaging copies of one vector returns that vector bit-for-bit.
class MeanAccumulator {
 public:
  explicit MeanAccumulator(std::size_t dim) : mean_(dim) {}

  void add(const ParamVector& x);
  std::size_t count() const noexcept { return count_; }
  /// Throws std::invalid_argument if nothing was added.
  const ParamVector& mean() const;

 private:
  ParamVector mean_;
  std::size_t count_ = 0;
};

/// Componentwise mean, summed in ascending index order.
ParamVector mean_reduce(std::span<const ParamVector> vectors);

/// x + a * y.
ParamVector axpy(const ParamVector& x, double a, const ParamVector& y);

/// In-place x += a * y.
void axpy_inplace(ParamVector& x, double a, const ParamVector& y);

ParamVector difference(const ParamVector& x, const ParamVector& y);
double dot(const ParamVector& x, const ParamVector& y);

/// Squared l2 norm. Throws std::domain_error on a non-finite entry.
double sq_norm(const ParamVector& x);

/// ||x - y||^2.
double sq_distance(const ParamVector& x, const ParamVector& y);

bool all_finite(const ParamVector& x) noexcept;

/// True when both vectors have identical object representations.
bool bitwise_equal(const ParamVector& x, const ParamVector& y) noexcept;

}  // namespace prspider
