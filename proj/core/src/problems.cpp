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


#include "prspider/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "prspider/errors.hpp"

namespace prspider {
namespace {

// Uniform noise on [-sqrt(3), sqrt(3)] has unit variance per coordinate.
constexpr double kUnitSpread = 1.7320508075688772;
constexpr double kInitialBox = 2.0;
constexpr std::uint64_t kInitialPointWorker = ~std::uint64_t{0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ParamVector uniform_box(RngStream& rng, std::size_t dim, double half_width) {
  ParamVector x(dim);
  for (std::size_t k = 0; k < dim; ++k) x[k] = rng.uniform(-half_width, half_width);
  return x;
}

ParamVector draw_initial_point(std::uint64_t seed, std::size_t dim) {
  RngStream rng(seed, {kInitialPointWorker, kProblemEpoch, 0});
  return uniform_box(rng, dim, kInitialBox);
}

double sigmoid_residual(const SigmoidSample& s, const ParamVector& x) { return dot(s.a, x) - s.b; }

double max_norm(const std::vector<SigmoidSample>& samples) {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::sqrt(sq_norm(s.a)));
  return m;
}

void require_positive(std::size_t value, const char* what) {
  if (value == 0) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::quadratic:
      return "quadratic";
    case Family::sigmoid:
      return "sigmoid";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "quadratic") return Family::quadratic;
  if (name == "sigmoid") return Family::sigmoid;
  throw std::invalid_argument("unknown problem family '" + std::string(name) + "'");
}

namespace sigmoid_loss {

double value(double t) noexcept {
  const double t2 = t * t;
  return t2 / (1.0 + t2);
}

double derivative(double t) noexcept {
  const double q = 1.0 + t * t;
  return 2.0 * t / (q * q);
}

}  // namespace sigmoid_loss

// ---------------------------------------------------------------------------
// LocalObjective

LocalObjective::LocalObjective(std::size_t worker, std::size_t dim, Family family,
                               double smoothness, double variance_bound, Data data)
    : worker_(worker),
      dim_(dim),
      family_(family),
      smoothness_(smoothness),
      variance_bound_(variance_bound),
      data_(std::move(data)) {}

LocalObjective LocalObjective::quadratic(std::size_t worker, std::vector<ParamVector> centers,
                                         double variance_bound) {
  if (centers.empty()) throw std::invalid_argument("quadratic objective needs >= 1 center");
  const std::size_t dim = centers.front().dim();
  FiniteQuadratic q;
  q.mean = mean_reduce(centers);
  double spread = 0.0;
  for (const auto& c : centers) spread += sq_distance(c, q.mean);
  q.spread_term = spread / static_cast<double>(centers.size());
  q.centers = std::move(centers);
  return LocalObjective(worker, dim, Family::quadratic, 1.0, variance_bound, std::move(q));
}

LocalObjective LocalObjective::quadratic_online(std::size_t worker, ParamVector mean,
                                                double spread, double variance_bound) {
  if (!(spread >= 0.0)) throw std::invalid_argument("quadratic_online: negative spread");
  const std::size_t dim = mean.dim();
  return LocalObjective(worker, dim, Family::quadratic, 1.0, variance_bound,
                        OnlineQuadratic{std::move(mean), spread});
}

LocalObjective LocalObjective::sigmoid(std::size_t worker, std::vector<SigmoidSample> samples,
                                       bool online, double variance_bound) {
  if (samples.empty()) throw std::invalid_argument("sigmoid objective needs >= 1 sample");
  const std::size_t dim = samples.front().a.dim();
  for (const auto& s : samples) {
    if (s.a.dim() != dim) throw std::invalid_argument("sigmoid objective: mixed dimensions");
  }
  const double a_max = max_norm(samples);
  const double smoothness = std::max(sigmoid_loss::kMaxCurvature * a_max * a_max, 1e-12);
  return LocalObjective(worker, dim, Family::sigmoid, smoothness, variance_bound,
                        SigmoidPopulation{std::move(samples), online});
}

std::optional<std::size_t> LocalObjective::sample_count() const noexcept {
  return std::visit(Overloaded{
                        [](const FiniteQuadratic& q) -> std::optional<std::size_t> {
                          return q.centers.size();
                        },
                        [](const OnlineQuadratic&) -> std::optional<std::size_t> {
                          return std::nullopt;
                        },
                        [](const SigmoidPopulation& p) -> std::optional<std::size_t> {
                          if (p.online) return std::nullopt;
                          return p.samples.size();
                        },
                    },
                    data_);
}

ParamVector LocalObjective::online_center(SampleId id) const {
  const auto& q = std::get<OnlineQuadratic>(data_);
  RngStream rng(id, {worker_, kProblemEpoch, 1});
  ParamVector c = q.mean;
  for (std::size_t k = 0; k < dim_; ++k) c[k] += rng.uniform(-q.spread, q.spread);
  return c;
}

void LocalObjective::check_sample(SampleId id) const {
  std::visit(Overloaded{
                 [id](const FiniteQuadratic& q) {
                   if (id >= q.centers.size()) {
                     throw std::invalid_argument("sample id " + std::to_string(id) +
                                                 " out of range [0, " +
                                                 std::to_string(q.centers.size()) + ")");
                   }
                 },
                 [](const OnlineQuadratic&) {},
                 [id](const SigmoidPopulation& p) {
                   if (id >= p.samples.size()) {
                     throw std::invalid_argument("sample id " + std::to_string(id) +
                                                 " out of range [0, " +
                                                 std::to_string(p.samples.size()) + ")");
                   }
                 },
             },
             data_);
}

double LocalObjective::sample_value(const ParamVector& x, SampleId id) const {
  check_sample(id);
  return std::visit(Overloaded{
                        [&](const FiniteQuadratic& q) {
                          return 0.5 * sq_distance(x, q.centers[id]);
                        },
                        [&](const OnlineQuadratic&) {
                          return 0.5 * sq_distance(x, online_center(id));
                        },
                        [&](const SigmoidPopulation& p) {
                          return sigmoid_loss::value(sigmoid_residual(p.samples[id], x));
                        },
                    },
                    data_);
}

ParamVector LocalObjective::sample_gradient(const ParamVector& x, SampleId id) const {
  check_sample(id);
  return std::visit(Overloaded{
                        [&](const FiniteQuadratic& q) { return difference(x, q.centers[id]); },
                        [&](const OnlineQuadratic&) { return difference(x, online_center(id)); },
                        [&](const SigmoidPopulation& p) {
                          const auto& s = p.samples[id];
                          const double slope = sigmoid_loss::derivative(sigmoid_residual(s, x));
                          ParamVector g(dim_);
                          axpy_inplace(g, slope, s.a);
                          return g;
                        },
                    },
                    data_);
}

double LocalObjective::expected_value(const ParamVector& x) const {
  return std::visit(Overloaded{
                        [&](const FiniteQuadratic& q) {
                          return 0.5 * sq_distance(x, q.mean) + 0.5 * q.spread_term;
                        },
                        [&](const OnlineQuadratic& q) {
                          // E||u||^2 = d spread^2 / 3 for the uniform box.
                          const double noise = static_cast<double>(dim_) * q.spread * q.spread / 3.0;
                          return 0.5 * sq_distance(x, q.mean) + 0.5 * noise;
                        },
                        [&](const SigmoidPopulation& p) {
                          double total = 0.0;
                          for (const auto& s : p.samples) {
                            total += sigmoid_loss::value(sigmoid_residual(s, x));
                          }
                          return total / static_cast<double>(p.samples.size());
                        },
                    },
                    data_);
}

ParamVector LocalObjective::expected_gradient(const ParamVector& x) const {
  return std::visit(Overloaded{
                        [&](const FiniteQuadratic& q) { return difference(x, q.mean); },
                        [&](const OnlineQuadratic& q) { return difference(x, q.mean); },
                        [&](const SigmoidPopulation& p) {
                          MeanAccumulator acc(dim_);
                          ParamVector g(dim_);
                          for (const auto& s : p.samples) {
                            const double slope =
                                sigmoid_loss::derivative(sigmoid_residual(s, x));
                            for (std::size_t k = 0; k < dim_; ++k) g[k] = slope * s.a[k];
                            acc.add(g);
                          }
                          return acc.mean();
                        },
                    },
                    data_);
}

SampleId LocalObjective::draw(RngStream& rng) const {
  return std::visit(Overloaded{
                        [&](const FiniteQuadratic& q) { return rng.uniform_index(q.centers.size()); },
                        [&](const OnlineQuadratic&) { return rng.next_u64(); },
                        [&](const SigmoidPopulation& p) { return rng.uniform_index(p.samples.size()); },
                    },
                    data_);
}

// ---------------------------------------------------------------------------
// IfoOracle

ParamVector IfoOracle::stochastic_gradient(const ParamVector& x, SampleId id) {
  ParamVector g = objective_->sample_gradient(x, id);
  ++calls_;
  return g;
}

ParamVector IfoOracle::stochastic_gradient(const ParamVector& x, RngStream& rng) {
  return stochastic_gradient(x, draw(rng));
}

ParamVector IfoOracle::full_gradient(const ParamVector& x) {
  const auto n = objective_->sample_count();
  if (!n) throw UnsupportedOperation("full_gradient: objective is online");
  MeanAccumulator acc(x.dim());
  for (SampleId j = 0; j < *n; ++j) acc.add(stochastic_gradient(x, j));
  return acc.mean();
}

ParamVector IfoOracle::batch_gradient(const ParamVector& x, std::size_t batch, RngStream& rng) {
  if (batch == 0) throw std::invalid_argument("batch_gradient: batch must be >= 1");
  MeanAccumulator acc(x.dim());
  for (std::size_t b = 0; b < batch; ++b) acc.add(stochastic_gradient(x, rng));
  return acc.mean();
}

// ---------------------------------------------------------------------------
// ProblemSuite

ProblemSuite::ProblemSuite(std::vector<LocalObjective> objectives, ParamVector initial_point,
                           double optimum_value, bool optimum_exact)
    : objectives_(std::move(objectives)),
      initial_point_(std::move(initial_point)),
      optimum_value_(optimum_value),
      optimum_exact_(optimum_exact) {
  if (objectives_.empty()) throw std::invalid_argument("ProblemSuite: no workers");
  for (const auto& obj : objectives_) {
    if (obj.dim() != initial_point_.dim()) {
      throw std::invalid_argument("ProblemSuite: objective dimension differs from x0");
    }
  }
}

bool ProblemSuite::is_finite_sum() const noexcept {
  return std::all_of(objectives_.begin(), objectives_.end(),
                     [](const LocalObjective& o) { return !o.is_online(); });
}

std::optional<std::size_t> ProblemSuite::samples_per_worker() const noexcept {
  if (!is_finite_sum()) return std::nullopt;
  return objectives_.front().sample_count();
}

double ProblemSuite::smoothness() const noexcept {
  double l = 0.0;
  for (const auto& o : objectives_) l = std::max(l, o.smoothness());
  return l;
}

double ProblemSuite::variance_bound() const noexcept {
  double s = 0.0;
  for (const auto& o : objectives_) s = std::max(s, o.variance_bound());
  return s;
}

double ProblemSuite::value(const ParamVector& x) const {
  double total = 0.0;
  for (const auto& o : objectives_) total += o.expected_value(x);
  return total / static_cast<double>(objectives_.size());
}

ParamVector true_global_gradient(const ProblemSuite& suite, const ParamVector& x) {
  MeanAccumulator acc(x.dim());
  for (const auto& o : suite.objectives()) acc.add(o.expected_gradient(x));
  return acc.mean();
}

// ---------------------------------------------------------------------------
// Generators

ProblemSuite quadratic_suite_from_centers(const std::vector<std::vector<ParamVector>>& centers,
                                          ParamVector initial_point) {
  if (centers.empty()) throw std::invalid_argument("quadratic suite: no workers");
  const std::size_t n = centers.front().size();
  MeanAccumulator grand(initial_point.dim());
  for (const auto& worker : centers) {
    if (worker.size() != n || n == 0) {
      throw std::invalid_argument("quadratic suite: workers need equal, positive n");
    }
    for (const auto& c : worker) grand.add(c);
  }
  const ParamVector& grand_mean = grand.mean();

  std::vector<LocalObjective> objectives;
  objectives.reserve(centers.size());
  double sigma_sq = 0.0;
  for (const auto& worker : centers) {
    double s = 0.0;
    for (const auto& c : worker) s += sq_distance(c, grand_mean);
    sigma_sq = std::max(sigma_sq, s / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    objectives.push_back(LocalObjective::quadratic(i, centers[i], std::sqrt(sigma_sq)));
  }
  ProblemSuite probe(objectives, initial_point, 0.0, true);
  const double f_star = probe.value(grand_mean);
  return ProblemSuite(std::move(objectives), std::move(initial_point), f_star, true);
}

ProblemSuite make_quadratic_suite(std::size_t workers, std::optional<std::size_t> samples,
                                  std::size_t dim, double heterogeneity, std::uint64_t seed) {
  require_positive(workers, "N");
  require_positive(dim, "d");
  if (samples) require_positive(*samples, "n");
  if (!(heterogeneity >= 0.0)) throw std::invalid_argument("heterogeneity must be >= 0");

  std::vector<ParamVector> means;
  for (std::size_t i = 0; i < workers; ++i) {
    RngStream rng(seed, {i, kProblemEpoch, 0});
    ParamVector mu(dim);
    for (std::size_t k = 0; k < dim; ++k) mu[k] = heterogeneity * rng.normal();
    means.push_back(std::move(mu));
  }
  ParamVector x0 = draw_initial_point(seed, dim);

  if (samples) {
    std::vector<std::vector<ParamVector>> centers(workers);
    for (std::size_t i = 0; i < workers; ++i) {
      RngStream rng(seed, {i, kProblemEpoch, 2});
      for (std::size_t j = 0; j < *samples; ++j) {
        ParamVector c = means[i];
        for (std::size_t k = 0; k < dim; ++k) c[k] += rng.uniform(-kUnitSpread, kUnitSpread);
        centers[i].push_back(std::move(c));
      }
    }
    return quadratic_suite_from_centers(centers, std::move(x0));
  }

  const ParamVector grand_mean = mean_reduce(means);
  const double noise = static_cast<double>(dim) * kUnitSpread * kUnitSpread / 3.0;
  double sigma_sq = 0.0;
  for (const auto& mu : means) sigma_sq = std::max(sigma_sq, noise + sq_distance(mu, grand_mean));
  std::vector<LocalObjective> objectives;
  for (std::size_t i = 0; i < workers; ++i) {
    objectives.push_back(
        LocalObjective::quadratic_online(i, means[i], kUnitSpread, std::sqrt(sigma_sq)));
  }
  ProblemSuite probe(objectives, x0, 0.0, true);
  const double f_star = probe.value(grand_mean);
  return ProblemSuite(std::move(objectives), std::move(x0), f_star, true);
}

ProblemSuite sigmoid_suite_from_samples(const std::vector<std::vector<SigmoidSample>>& samples,
                                        ParamVector initial_point, bool online) {
  if (samples.empty()) throw std::invalid_argument("sigmoid suite: no workers");
  double a_max = 0.0;
  for (const auto& worker : samples) a_max = std::max(a_max, max_norm(worker));
  // ||g_xi - grad f|| <= ||g_xi|| + ||grad f|| <= 2 sup|phi'| max ||a||.
  const double sigma = 2.0 * sigmoid_loss::kMaxSlope * a_max;
  std::vector<LocalObjective> objectives;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    objectives.push_back(LocalObjective::sigmoid(i, samples[i], online, sigma));
  }
  // phi >= 0, so 0 is a certified lower bound on f^*.
  return ProblemSuite(std::move(objectives), std::move(initial_point), 0.0, false);
}

ProblemSuite make_nonconvex_suite(std::size_t workers, std::optional<std::size_t> samples,
                                  std::size_t dim, double heterogeneity, std::uint64_t seed,
                                  std::size_t population) {
  require_positive(workers, "N");
  require_positive(dim, "d");
  if (samples) require_positive(*samples, "n");
  require_positive(population, "population");
  if (!(heterogeneity >= 0.0)) throw std::invalid_argument("heterogeneity must be >= 0");

  const double scale = kUnitSpread / std::sqrt(static_cast<double>(dim));
  const std::size_t count = samples.value_or(population);
  std::vector<std::vector<SigmoidSample>> all(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    RngStream shift_rng(seed, {i, kProblemEpoch, 0});
    ParamVector mu(dim);
    for (std::size_t k = 0; k < dim; ++k) mu[k] = heterogeneity * scale * shift_rng.uniform(-1.0, 1.0);
    const double beta = heterogeneity * shift_rng.uniform(-1.0, 1.0);

    RngStream rng(seed, {i, kProblemEpoch, 2});
    for (std::size_t j = 0; j < count; ++j) {
      SigmoidSample s{mu, beta + rng.uniform(-1.0, 1.0)};
      for (std::size_t k = 0; k < dim; ++k) s.a[k] += scale * rng.uniform(-1.0, 1.0);
      all[i].push_back(std::move(s));
    }
  }
  return sigmoid_suite_from_samples(all, draw_initial_point(seed, dim), !samples.has_value());
}

ProblemSuite make_suite(const SuiteSpec& spec) {
  switch (spec.family) {
    case Family::quadratic:
      return make_quadratic_suite(spec.workers, spec.samples, spec.dim, spec.heterogeneity,
                                  spec.seed);
    case Family::sigmoid:
      return make_nonconvex_suite(spec.workers, spec.samples, spec.dim, spec.heterogeneity,
                                  spec.seed, spec.population);
  }
  throw std::invalid_argument("make_suite: unknown family");
}

}  // namespace prspider
