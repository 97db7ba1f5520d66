// Copyright 2026 The cmix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmix/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cmix {
namespace {

Vector gaussian_vector(Index n, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * normal(rng);
  return v;
}

double uniform_in(std::pair<double, double> range, Rng& rng) {
  return std::uniform_real_distribution<double>(range.first, range.second)(rng);
}

void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first > 0.0) || r.second < r.first) {
    throw std::invalid_argument(std::string("meta task spec: ") + name + " range must be positive and ordered");
  }
}

Dataset sample_task_rows(const MetaTaskSpec& spec, const Vector& theta, const Link& link, Index n, Rng& rng) {
  SingleIndexSpec si;
  si.p = spec.p;
  si.s = spec.s;
  si.K = spec.K;
  si.sigma_z = spec.sigma_z;
  si.sigma_xi = spec.sigma_xi;
  si.sigma_eps = spec.sigma_eps;
  return sample_single_index(si, theta, link, n, rng).data;
}

Link draw_task_link(const MetaTaskSpec& spec, Rng& rng) {
  Link link;
  link.kind = Link::Kind::kSigmoidScaled;
  link.a = uniform_in(spec.a_range, rng);
  link.b = uniform_in(spec.b_range, rng);
  link.c = uniform_in(spec.c_range, rng);
  return link;
}

MetaTask draw_task(const MetaTaskSpec& spec, const Vector& theta, Rng& rng) {
  MetaTask task;
  task.link = draw_task_link(spec, rng);
  task.support = sample_task_rows(spec, theta, task.link, spec.support_shots, rng);
  task.query = sample_task_rows(spec, theta, task.link, spec.query_shots, rng);
  return task;
}

}  // namespace

double Link::operator()(double t) const {
  switch (kind) {
    case Kind::kSigmoidScaled:
      return a / (1.0 + std::exp(-b * t)) + c * t;
    case Kind::kCubicPlusLinear:
      return a * t * t * t + c * t;
    case Kind::kTable: {
      const std::size_t m = knots_t.size();
      if (m == 1) return knots_y[0];
      std::size_t hi = static_cast<std::size_t>(std::upper_bound(knots_t.begin(), knots_t.end(), t) - knots_t.begin());
      hi = std::clamp<std::size_t>(hi, 1, m - 1);
      const std::size_t lo = hi - 1;
      const double w = (t - knots_t[lo]) / (knots_t[hi] - knots_t[lo]);
      return knots_y[lo] + w * (knots_y[hi] - knots_y[lo]);
    }
  }
  return 0.0;
}

void Link::validate() const {
  switch (kind) {
    case Kind::kSigmoidScaled:
      if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw std::invalid_argument("sigmoid link needs a, b, c > 0");
      return;
    case Kind::kCubicPlusLinear:
      if (!(a >= 0.0 && c > 0.0)) throw std::invalid_argument("cubic link needs a >= 0 and c > 0");
      return;
    case Kind::kTable:
      if (knots_t.empty() || knots_t.size() != knots_y.size()) {
        throw std::invalid_argument("table link needs matching, nonempty knot lists");
      }
      for (std::size_t i = 1; i < knots_t.size(); ++i) {
        if (!(knots_t[i] > knots_t[i - 1]) || !(knots_y[i] > knots_y[i - 1])) {
          throw std::invalid_argument("table link knots must be strictly increasing in t and y");
        }
      }
      return;
  }
}

Link::Kind parse_link_kind(const std::string& name) {
  if (name == "sigmoid-scaled") return Link::Kind::kSigmoidScaled;
  if (name == "cubic-plus-linear") return Link::Kind::kCubicPlusLinear;
  if (name == "table") return Link::Kind::kTable;
  throw std::invalid_argument("unknown link kind: " + name);
}

std::string to_string(Link::Kind kind) {
  switch (kind) {
    case Link::Kind::kSigmoidScaled:
      return "sigmoid-scaled";
    case Link::Kind::kCubicPlusLinear:
      return "cubic-plus-linear";
    case Link::Kind::kTable:
      return "table";
  }
  return "?";
}

void SingleIndexSpec::validate() const {
  if (p < 1 || s < 1 || s > p) throw std::invalid_argument("single-index spec needs 1 <= s <= p");
  if (K < 1) throw std::invalid_argument("single-index spec needs K >= 1");
  if (N < 1) throw std::invalid_argument("single-index spec needs N >= 1");
  if (sigma_z < 0.0 || sigma_xi < 0.0 || sigma_eps < 0.0) {
    throw std::invalid_argument("single-index noise scales must be non-negative");
  }
  link.validate();
}

Vector draw_sparse_direction(Index p, Index s, Rng& rng) {
  std::vector<Index> coords(static_cast<std::size_t>(p));
  std::iota(coords.begin(), coords.end(), Index{0});
  std::shuffle(coords.begin(), coords.end(), rng);
  Vector theta = Vector::Zero(p);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < s; ++i) theta[coords[static_cast<std::size_t>(i)]] = normal(rng);
  const double norm = theta.norm();
  if (!(norm > 0.0)) throw std::runtime_error("degenerate direction draw");
  return theta / norm;
}

SingleIndexData sample_single_index(const SingleIndexSpec& spec, const Vector& theta, const Link& link, Index n,
                                    Rng& rng) {
  if (theta.size() != spec.p) throw DimensionError("single-index theta has wrong length");
  const double theta_norm = theta.norm();
  std::uniform_int_distribution<int> cluster_dist(1, spec.K);
  std::normal_distribution<double> normal(0.0, 1.0);

  SingleIndexData out;
  out.data.features.resize(n, spec.p);
  out.data.labels.resize(n, 1);
  out.truth.theta = theta;
  out.truth.cluster.resize(static_cast<std::size_t>(n));
  out.truth.clean_z.resize(n, spec.p);
  for (Index i = 0; i < n; ++i) {
    const int k = cluster_dist(rng);
    out.truth.cluster[static_cast<std::size_t>(i)] = k;
    for (Index j = 0; j < spec.p; ++j) {
      const double z = (static_cast<double>(k) / theta_norm) * theta[j] + spec.sigma_z * normal(rng);
      out.truth.clean_z(i, j) = z;
      out.data.features(i, j) = z + spec.sigma_xi * normal(rng);
    }
    const double index = out.truth.clean_z.row(i).dot(theta);
    out.data.labels(i, 0) = link(index) + spec.sigma_eps * normal(rng);
  }
  for (Index j = 0; j < spec.p; ++j) out.data.feature_names.push_back("x" + std::to_string(j));
  out.data.label_names = {"y"};
  return out;
}

SingleIndexData gen_single_index(const SingleIndexSpec& spec) {
  spec.validate();
  Rng theta_rng = make_rng(spec.seed, 0);
  const Vector theta = draw_sparse_direction(spec.p, spec.s, theta_rng);
  Rng rng = make_rng(spec.seed, 1);
  return sample_single_index(spec, theta, spec.link, spec.N, rng);
}

void MetaTaskSpec::validate() const {
  if (M < 1 || target_tasks < 1) throw std::invalid_argument("meta task spec needs M >= 1 and target_tasks >= 1");
  if (support_shots < 1 || query_shots < 1) throw std::invalid_argument("meta task spec needs shots >= 1");
  if (p < 1 || s < 1 || s > p || K < 1) throw std::invalid_argument("meta task spec needs 1 <= s <= p and K >= 1");
  if (sigma_z < 0.0 || sigma_xi < 0.0 || sigma_eps < 0.0) {
    throw std::invalid_argument("meta task noise scales must be non-negative");
  }
  check_range(a_range, "a");
  check_range(b_range, "b");
  check_range(c_range, "c");
}

MetaTaskSet gen_meta_tasks(const MetaTaskSpec& spec) {
  spec.validate();
  MetaTaskSet set;
  Rng theta_rng = make_rng(spec.seed, 0);
  set.theta = draw_sparse_direction(spec.p, spec.s, theta_rng);
  const std::uint64_t train_base = derive_seed(spec.seed, 1);
  const std::uint64_t target_base = derive_seed(spec.seed, 2);
  for (int m = 0; m < spec.M; ++m) {
    Rng rng = make_rng(train_base, static_cast<std::uint64_t>(m));
    set.train.push_back(draw_task(spec, set.theta, rng));
  }
  for (int m = 0; m < spec.target_tasks; ++m) {
    Rng rng = make_rng(target_base, static_cast<std::uint64_t>(m));
    set.target.push_back(draw_task(spec, set.theta, rng));
  }
  return set;
}

std::string to_string(TestShift shift) {
  switch (shift) {
    case TestShift::kNone:
      return "none";
    case TestShift::kSignFlip:
      return "sign-flip";
    case TestShift::kScale2:
      return "scale-2";
  }
  return "?";
}

void CovariateShiftSpec::validate() const {
  if (n < 1 || p1 < 1 || p2 < 0 || n_test < 1) throw std::invalid_argument("covariate shift spec: bad sizes");
  if (sigma_x < 0.0 || sigma_a < 0.0 || sigma_eps < 0.0) {
    throw std::invalid_argument("covariate shift spec: noise scales must be non-negative");
  }
  if (!(theta_norm > 0.0)) throw std::invalid_argument("covariate shift spec: theta_norm must be positive");
}

CovariateShiftData gen_covariate_shift(const CovariateShiftSpec& spec, TestShift shift) {
  spec.validate();
  const Index p = spec.p1 + spec.p2;
  CovariateShiftData out;
  {
    Rng rng = make_rng(spec.seed, 0);
    out.theta = Vector::Zero(p);
    out.theta.head(spec.p1) = gaussian_vector(spec.p1, 1.0, rng);
    out.theta *= spec.theta_norm / out.theta.norm();
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  auto label = [&](const Vector& x, Rng& rng) { return out.theta.dot(x) + spec.sigma_eps * normal(rng); };

  Rng rng = make_rng(spec.seed, 1);
  Dataset& train = out.train;
  train.features.resize(2 * spec.n, p);
  train.labels.resize(2 * spec.n, 1);
  train.domain_ids.emplace(static_cast<std::size_t>(2 * spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    Vector x(p);
    x.head(spec.p1) = gaussian_vector(spec.p1, spec.sigma_x, rng);
    x.tail(spec.p2) = (gaussian_vector(spec.p2, spec.sigma_a, rng).array() + spec.a_mean).matrix();
    Vector twin(p);
    twin.head(spec.p1) = x.head(spec.p1) + gaussian_vector(spec.p1, spec.sigma_eps, rng);
    twin.tail(spec.p2) = -x.tail(spec.p2) + gaussian_vector(spec.p2, spec.sigma_eps, rng);
    train.features.row(2 * i) = x.transpose();
    train.features.row(2 * i + 1) = twin.transpose();
    train.labels(2 * i, 0) = label(x, rng);
    train.labels(2 * i + 1, 0) = label(twin, rng);
    (*train.domain_ids)[static_cast<std::size_t>(2 * i)] = 0;
    (*train.domain_ids)[static_cast<std::size_t>(2 * i + 1)] = 1;
  }

  Rng test_rng = make_rng(spec.seed, 2);
  std::bernoulli_distribution coin(0.5);
  Dataset& test = out.test;
  test.features.resize(spec.n_test, p);
  test.labels.resize(spec.n_test, 1);
  for (Index i = 0; i < spec.n_test; ++i) {
    Vector x(p);
    x.head(spec.p1) = gaussian_vector(spec.p1, spec.sigma_x, test_rng);
    Vector a = (gaussian_vector(spec.p2, spec.sigma_a, test_rng).array() + spec.a_mean).matrix();
    switch (shift) {
      case TestShift::kNone:
        if (coin(test_rng)) a = -a;
        break;
      case TestShift::kSignFlip:
        a = -a;
        break;
      case TestShift::kScale2:
        a *= 2.0;
        break;
    }
    x.tail(spec.p2) = a;
    test.features.row(i) = x.transpose();
    test.labels(i, 0) = label(x, test_rng);
  }
  for (Index j = 0; j < p; ++j) {
    const std::string name = (j < spec.p1 ? "z" : "a") + std::to_string(j < spec.p1 ? j : j - spec.p1);
    train.feature_names.push_back(name);
  }
  test.feature_names = train.feature_names;
  train.label_names = test.label_names = {"y"};
  return out;
}

std::vector<RegimeCheck> check_shift_regime(const CovariateShiftSpec& spec, double k, const RegimeConstants& c) {
  const double n = static_cast<double>(spec.n);
  const double p1 = static_cast<double>(spec.p1);
  const double p2 = static_cast<double>(spec.p2);
  const double p = p1 + p2;
  const double tn = spec.theta_norm;
  std::vector<RegimeCheck> checks;
  auto add = [&](std::string name, double lhs, double rhs, bool ok) {
    checks.push_back({std::move(name), lhs, rhs, ok});
  };
  const double delta_floor = std::exp(-p1 * p1 / (2.0 * n));
  add("delta > exp(-p1^2/(2n))", c.delta, delta_floor, c.delta > delta_floor && c.delta < 1.0);
  add("sigma_a >= sigma_x (c1 >= 1)", spec.sigma_a, c.c1 * spec.sigma_x, spec.sigma_a >= c.c1 * spec.sigma_x);
  const double noise_floor = c.c2 * std::pow(n, 2.5) * spec.sigma_eps / (tn * c.delta);
  add("sigma_x >= c2 n^(5/2) sigma_eps / (|theta| delta)", spec.sigma_x, noise_floor, spec.sigma_x >= noise_floor);
  const double dim_floor = c.c2 * std::sqrt(p2) * tn / (std::sqrt(n) * p1);
  add("sigma_x >= c2 sqrt(p2) |theta| / (sqrt(n) p1)", spec.sigma_x, dim_floor, spec.sigma_x >= dim_floor);
  const double eps_cap = c.c3 / (p * std::pow(n, 1.5));
  add("sigma_eps^2 <= c3 / (p n^(3/2))", spec.sigma_eps * spec.sigma_eps, eps_cap,
      spec.sigma_eps * spec.sigma_eps <= eps_cap);
  const double k_floor = c.c4 * std::sqrt(p2 / p1) * std::pow(n, 0.25);
  add("k > c4 sqrt(p2/p1) n^(1/4)", k, k_floor, k > k_floor);
  const double k_cap = c.c5 * std::min(spec.sigma_x / tn * std::sqrt(p1 * n), n);
  add("k < c5 min(sigma_x/|theta| sqrt(p1 n), n)", k, k_cap, k < k_cap);
  return checks;
}

double min_cross_pair_gap(const Dataset& train) {
  const Index pairs = train.size() / 2;
  if (pairs < 2) throw std::invalid_argument("min_cross_pair_gap needs at least two pairs");
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < pairs; ++i) {
    for (Index j = 0; j < pairs; ++j) {
      if (i == j) continue;
      best = std::min(best, std::abs(train.labels(2 * i, 0) - train.labels(2 * j + 1, 0)));
    }
  }
  return best;
}

double shift_bandwidth(const Dataset& train, const CovariateShiftSpec& spec, const RegimeConstants& c) {
  const double n = static_cast<double>(spec.n);
  const double ratio = n * n / static_cast<double>(spec.p1);
  if (!(ratio > 1.0)) throw std::invalid_argument("shift_bandwidth needs n^2 > p1");
  return c.c6 * min_cross_pair_gap(train) / std::sqrt(std::log(ratio));
}

}  // namespace cmix
