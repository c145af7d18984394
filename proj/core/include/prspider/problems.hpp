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
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "prspider/numerics.hpp"
#include "prspider/rng.hpp"

namespace prspider {

enum class Family { quadratic, sigmoid };

std::string_view to_string(Family family) noexcept;
/// Throws std::invalid_argument on an unknown name.
Family parse_family(std::string_view name);

/// Identifies one sample xi. For enumerable objectives it is an index in
/// [0, n); for continuous online objectives it is the key the sample is
/// generated from.
using SampleId = std::uint64_t;

/// One term phi(<a, x> - b) of the sigmoid-regression family, with
/// phi(t) = t^2 / (1 + t^2).
struct SigmoidSample {
  ParamVector a;
  double b = 0.0;
};

/// phi, phi' and the constants bounding them.
namespace sigmoid_loss {
double value(double t) noexcept;
double derivative(double t) noexcept;
/// sup |phi''| = |phi''(0)|.
inline constexpr double kMaxCurvature = 2.0;
/// sup |phi'|, attained at t = 1/sqrt(3).
inline constexpr double kMaxSlope = 0.649519052838329;  // 3 sqrt(3) / 8
}  // namespace sigmoid_loss

/// Worker-local objective f_i with its sampling oracle. Immutable; IFO calls
/// are metered by IfoOracle, which each worker owns.
class LocalObjective {
 public:
  /// Finite sum of f(x; j) = 0.5 ||x - c_j||^2.
  static LocalObjective quadratic(std::size_t worker, std::vector<ParamVector> centers,
                                  double variance_bound);
  /// Online quadratic: c = mean + u with u uniform on [-spread, spread]^d,
  /// generated deterministically from the sample id.
  static LocalObjective quadratic_online(std::size_t worker, ParamVector mean, double spread,
                                         double variance_bound);
  /// Sigmoid regression over an explicit sample list. With online = true the
  /// list is the population D_i: it can be sampled and its expectation is
  /// exact, but full_gradient is unavailable to algorithms.
  static LocalObjective sigmoid(std::size_t worker, std::vector<SigmoidSample> samples,
                                bool online, double variance_bound);

  std::size_t worker_id() const noexcept { return worker_; }
  std::size_t dim() const noexcept { return dim_; }
  Family family() const noexcept { return family_; }
  /// n for finite-sum objectives; nullopt when online.
  std::optional<std::size_t> sample_count() const noexcept;
  bool is_online() const noexcept { return !sample_count().has_value(); }
  /// Mean-squared smoothness modulus L.
  double smoothness() const noexcept { return smoothness_; }
  /// sigma with E ||grad f_i(x; xi) - grad f(x)||^2 <= sigma^2.
  double variance_bound() const noexcept { return variance_bound_; }

  double sample_value(const ParamVector& x, SampleId id) const;
  ParamVector sample_gradient(const ParamVector& x, SampleId id) const;
  /// f_i(x) = E_xi f_i(x; xi), exact.
  double expected_value(const ParamVector& x) const;
  /// grad f_i(x), exact (closed form or enumeration of the population).
  ParamVector expected_gradient(const ParamVector& x) const;

  /// Uniform sample (with replacement) from D_i.
  SampleId draw(RngStream& rng) const;
  /// Throws std::invalid_argument when id is out of range.
  void check_sample(SampleId id) const;

 private:
  struct FiniteQuadratic {
    std::vector<ParamVector> centers;
    ParamVector mean;
    double spread_term = 0.0;  // (1/n) sum ||c_j - mean||^2
  };
  struct OnlineQuadratic {
    ParamVector mean;
    double spread = 0.0;
  };
  struct SigmoidPopulation {
    std::vector<SigmoidSample> samples;
    bool online = false;
  };
  using Data = std::variant<FiniteQuadratic, OnlineQuadratic, SigmoidPopulation>;

  LocalObjective(std::size_t worker, std::size_t dim, Family family, double smoothness,
                 double variance_bound, Data data);

  ParamVector online_center(SampleId id) const;

  std::size_t worker_;
  std::size_t dim_;
  Family family_;
  double smoothness_;
  double variance_bound_;
  Data data_;
};

/// Meters IFO calls against one objective. Owned by exactly one worker.
class IfoOracle {
 public:
  explicit IfoOracle(const LocalObjective& objective) : objective_(&objective) {}

  /// grad f_i(x; xi); costs one IFO call.
  ParamVector stochastic_gradient(const ParamVector& x, SampleId id);
  ParamVector stochastic_gradient(const ParamVector& x, RngStream& rng);
  /// (1/n) sum_j grad f_i(x; xi_j); costs n calls. Throws
  /// UnsupportedOperation for online objectives.
  ParamVector full_gradient(const ParamVector& x);
  /// Mean of `batch` i.i.d. stochastic gradients; costs `batch` calls.
  ParamVector batch_gradient(const ParamVector& x, std::size_t batch, RngStream& rng);

  SampleId draw(RngStream& rng) const { return objective_->draw(rng); }
  /// Charge `count` calls made outside the helpers above.
  void charge(std::uint64_t count) noexcept { calls_ += count; }

  std::uint64_t calls() const noexcept { return calls_; }
  const LocalObjective& objective() const noexcept { return *objective_; }

 private:
  const LocalObjective* objective_;
  std::uint64_t calls_ = 0;
};

/// f(x) = (1/N) sum_i f_i(x) together with x^0 and f^*.
class ProblemSuite {
 public:
  /// All objectives must share one dimension equal to initial_point.dim().
  ProblemSuite(std::vector<LocalObjective> objectives, ParamVector initial_point,
               double optimum_value, bool optimum_exact);

  std::size_t workers() const noexcept { return objectives_.size(); }
  std::size_t dim() const noexcept { return initial_point_.dim(); }
  const LocalObjective& objective(std::size_t i) const { return objectives_.at(i); }
  const std::vector<LocalObjective>& objectives() const noexcept { return objectives_; }
  const ParamVector& initial_point() const noexcept { return initial_point_; }

  /// f^*: exact for quadratics, a certified lower bound otherwise.
  double optimum_value() const noexcept { return optimum_value_; }
  bool optimum_is_exact() const noexcept { return optimum_exact_; }

  /// True when every objective is a finite sum.
  bool is_finite_sum() const noexcept;
  /// Common n for finite-sum suites.
  std::optional<std::size_t> samples_per_worker() const noexcept;
  Family family() const noexcept { return objectives_.front().family(); }

  /// max_i L_i.
  double smoothness() const noexcept;
  /// max_i sigma_i.
  double variance_bound() const noexcept;

  double value(const ParamVector& x) const;
  /// Upper bound on f(x^0) - f^*.
  double gap_bound() const { return value(initial_point_) - optimum_value_; }

 private:
  std::vector<LocalObjective> objectives_;
  ParamVector initial_point_;
  double optimum_value_;
  bool optimum_exact_;
};

/// grad f(x) = (1/N) sum_i grad f_i(x). A metrics oracle: charges no IFO.
ParamVector true_global_gradient(const ProblemSuite& suite, const ParamVector& x);

/// Parameters of a generated suite. samples == nullopt requests an online
/// suite.
struct SuiteSpec {
  Family family = Family::quadratic;
  std::size_t workers = 4;
  std::optional<std::size_t> samples = 64;
  std::size_t dim = 8;
  double heterogeneity = 1.0;
  std::uint64_t seed = 1;
  /// Size of D_i for online sigmoid suites.
  std::size_t population = 2048;
};

/// f_i(x; xi_j) = 0.5 ||x - c_ij||^2 with c_ij = mu_i + u_ij, u uniform on
/// [-sqrt(3), sqrt(3)]^d and worker means mu_i ~ heterogeneity * N(0, I).
/// L = 1; f^* = f(grand mean) exactly.
ProblemSuite make_quadratic_suite(std::size_t workers, std::optional<std::size_t> samples,
                                  std::size_t dim, double heterogeneity, std::uint64_t seed);

/// Sigmoid regression phi(<a, x> - b) with compactly supported (a, b) draws
/// shifted per worker by `heterogeneity`. L = 2 max ||a||^2,
/// sigma = 2 sup|phi'| max ||a||, f^* >= 0.
ProblemSuite make_nonconvex_suite(std::size_t workers, std::optional<std::size_t> samples,
                                  std::size_t dim, double heterogeneity, std::uint64_t seed,
                                  std::size_t population = 2048);

ProblemSuite make_suite(const SuiteSpec& spec);

/// Finite-sum quadratic suite with explicit centers (one list per worker,
/// all of equal length).
ProblemSuite quadratic_suite_from_centers(const std::vector<std::vector<ParamVector>>& centers,
                                          ParamVector initial_point);

/// Sigmoid suite with explicit samples (one list per worker).
ProblemSuite sigmoid_suite_from_samples(const std::vector<std::vector<SigmoidSample>>& samples,
                                        ParamVector initial_point, bool online);

}  // namespace prspider
