// Copyright 2026 The treegate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "treegate/permtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treegate/error.hpp"
#include "treegate/normal.hpp"
#include "treegate/rng.hpp"

namespace treegate {

namespace {

// Eigenvalues below this fraction of the largest are treated as zero.
constexpr double kPinvRelTol = 1e-10;
// Reference statistics within this relative distance of the observed one
// count as ties (>=), so summation-order noise never shrinks a p-value.
constexpr double kTieRelTol = 1e-9;

struct PreparedBlock {
  Eigen::MatrixXd scores;  // n x q
  Eigen::VectorXd total;   // column sums
  std::size_t n = 0;
  std::size_t m = 0;
  double weight = 0.0;
  std::vector<std::uint8_t> observed;
};

struct Prepared {
  std::vector<PreparedBlock> blocks;
  Eigen::Index q = 1;
  double scale = 0.0;  // largest |score|, for tie tolerance
};

Prepared prepare(std::span<const Block> data, Statistic statistic) {
  validate_blocks(data);
  double n_total = 0;
  for (const Block& b : data) n_total += static_cast<double>(b.size());

  Prepared prepared;
  prepared.q = statistic == Statistic::energy ? 6 : 1;
  prepared.blocks.reserve(data.size());
  for (const Block& b : data) {
    PreparedBlock pb;
    pb.n = b.size();
    pb.m = b.treated();
    pb.weight = static_cast<double>(pb.n) / n_total;
    pb.observed = b.treatment;
    switch (statistic) {
      case Statistic::mean_diff:
        pb.scores = Eigen::Map<const Eigen::VectorXd>(b.outcome.data(),
                                                       static_cast<Eigen::Index>(b.size()));
        break;
      case Statistic::rank:
        pb.scores = midranks(b.outcome);
        break;
      case Statistic::energy:
        pb.scores = energy_scores(b.outcome);
        break;
    }
    pb.total = pb.scores.colwise().sum().transpose();
    prepared.scale = std::max(prepared.scale, pb.scores.cwiseAbs().maxCoeff());
    prepared.blocks.push_back(std::move(pb));
  }
  return prepared;
}

// Treated-minus-control mean difference given the treated column sums.
Eigen::VectorXd block_difference(const PreparedBlock& b, const Eigen::VectorXd& treated_sum) {
  const double m = static_cast<double>(b.m);
  const double c = static_cast<double>(b.n - b.m);
  return treated_sum / m - (b.total - treated_sum) / c;
}

Eigen::VectorXd observed_statistic(const Prepared& p) {
  Eigen::VectorXd stat = Eigen::VectorXd::Zero(p.q);
  for (const PreparedBlock& b : p.blocks) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p.q);
    for (std::size_t i = 0; i < b.n; ++i)
      if (b.observed[i]) sum += b.scores.row(static_cast<Eigen::Index>(i)).transpose();
    stat += b.weight * block_difference(b, sum);
  }
  return stat;
}

// Maps statistic vectors to the whitened space of a pseudo-inverse, so that
// s' pinv(sigma) s = |W s|^2. Returns a 0-row W when sigma vanishes.
Eigen::MatrixXd whitening(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma);
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double largest = values.maxCoeff();
  if (!(largest > 0.0)) return Eigen::MatrixXd(0, sigma.cols());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) > kPinvRelTol * largest) kept.push_back(i);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(kept.size()), sigma.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Eigen::Index i = kept[r];
    w.row(static_cast<Eigen::Index>(r)) = solver.eigenvectors().col(i).transpose() / std::sqrt(values(i));
  }
  return w;
}

double scalarize(const Eigen::VectorXd& s, Sides sides) {
  return sides == Sides::one ? s(0) : std::abs(s(0));
}

// Tail count of reference scalars at or above the observed value.
std::size_t count_at_least(const std::vector<double>& reference, double observed, double scale) {
  const double tol = kTieRelTol * std::max({std::abs(observed), scale, 1e-300});
  return static_cast<std::size_t>(std::count_if(reference.begin(), reference.end(),
                                                [&](double t) { return t >= observed - tol; }));
}

// Scalar reference values for a set of statistic vectors (columns of V).
// For energy, the quadratic form uses the second-moment matrix of V itself.
std::vector<double> scalar_reference(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& observed,
                                     Statistic statistic, Sides sides, double* observed_scalar,
                                     const Eigen::MatrixXd* moment_source = nullptr) {
  std::vector<double> out(static_cast<std::size_t>(vectors.cols()));
  if (statistic != Statistic::energy) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k)
      out[static_cast<std::size_t>(k)] = scalarize(vectors.col(k), sides);
    *observed_scalar = scalarize(observed, sides);
    return out;
  }
  const Eigen::MatrixXd& src = moment_source ? *moment_source : vectors;
  const Eigen::MatrixXd sigma = src * src.transpose() / static_cast<double>(src.cols());
  const Eigen::MatrixXd w = whitening(sigma);
  for (Eigen::Index k = 0; k < vectors.cols(); ++k)
    out[static_cast<std::size_t>(k)] = w.rows() ? (w * vectors.col(k)).squaredNorm() : 0.0;
  *observed_scalar = w.rows() ? (w * observed).squaredNorm() : 0.0;
  return out;
}

PermutationResult monte_carlo(const Prepared& p, const TestSpec& spec, std::uint64_t stream) {
  if (spec.n_perms < 100)
    throw Error("Monte Carlo permutation test needs n_perms >= 100, got " + std::to_string(spec.n_perms));
  Rng rng = make_rng(spec.seed, stream);
  const auto draws = static_cast<Eigen::Index>(spec.n_perms);
  Eigen::MatrixXd reference(p.q, draws);

  std::vector<std::vector<std::uint32_t>> order(p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    order[b].resize(p.blocks[b].n);
    std::iota(order[b].begin(), order[b].end(), 0u);
  }
  Eigen::VectorXd sum(p.q);
  Eigen::VectorXd stat(p.q);
  for (Eigen::Index d = 0; d < draws; ++d) {
    stat.setZero();
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const PreparedBlock& blk = p.blocks[b];
      auto& idx = order[b];
      // Draw the smaller arm by partial Fisher-Yates.
      const bool draw_treated = blk.m <= blk.n - blk.m;
      const std::size_t k = draw_treated ? blk.m : blk.n - blk.m;
      sum.setZero();
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, blk.n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        sum += blk.scores.row(idx[i]).transpose();
      }
      if (!draw_treated) sum = blk.total - sum;
      stat += blk.weight * block_difference(blk, sum);
    }
    reference.col(d) = stat;
  }

  const Eigen::VectorXd observed = observed_statistic(p);
  PermutationResult result;
  result.method = NullMethod::monte_carlo;
  result.n_reference = static_cast<double>(draws);
  if (spec.statistic == Statistic::energy) {
    Eigen::MatrixXd all(p.q, draws + 1);
    all.col(0) = observed;
    all.rightCols(draws) = reference;
    std::vector<double> ref = scalar_reference(reference, observed, spec.statistic, spec.sides,
                                               &result.statistic, &all);
    const std::size_t hits = count_at_least(ref, result.statistic, 1.0);
    result.p_value = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(draws));
  } else {
    std::vector<double> ref =
        scalar_reference(reference, observed, spec.statistic, spec.sides, &result.statistic);
    const std::size_t hits = count_at_least(ref, result.statistic, p.scale);
    result.p_value = (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(draws));
  }
  return result;
}

// Every m-subset of n, as per-block mean-difference vectors.
std::vector<Eigen::VectorXd> enumerate_block(const PreparedBlock& b, Eigen::Index q) {
  std::vector<std::uint8_t> mask(b.n, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(b.m), 1);
  std::vector<Eigen::VectorXd> out;
  do {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(q);
    for (std::size_t i = 0; i < b.n; ++i)
      if (mask[i]) sum += b.scores.row(static_cast<Eigen::Index>(i)).transpose();
    out.push_back(b.weight * block_difference(b, sum));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

PermutationResult exact(const Prepared& p, const TestSpec& spec, double count) {
  if (count > spec.exact_cap)
    throw Error("exact enumeration needs " + std::to_string(count) +
                " assignments, above the cap of " + std::to_string(spec.exact_cap));
  std::vector<std::vector<Eigen::VectorXd>> per_block;
  per_block.reserve(p.blocks.size());
  for (const PreparedBlock& b : p.blocks) per_block.push_back(enumerate_block(b, p.q));

  const auto total = static_cast<Eigen::Index>(count);
  Eigen::MatrixXd reference(p.q, total);
  std::vector<std::size_t> digit(per_block.size(), 0);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::VectorXd stat = Eigen::VectorXd::Zero(p.q);
    for (std::size_t b = 0; b < per_block.size(); ++b) stat += per_block[b][digit[b]];
    reference.col(k) = stat;
    for (std::size_t b = 0; b < digit.size(); ++b) {
      if (++digit[b] < per_block[b].size()) break;
      digit[b] = 0;
    }
  }

  const Eigen::VectorXd observed = observed_statistic(p);
  PermutationResult result;
  result.method = NullMethod::exact;
  result.n_reference = count;
  std::vector<double> ref =
      scalar_reference(reference, observed, spec.statistic, spec.sides, &result.statistic);
  const double scale = spec.statistic == Statistic::energy ? 1.0 : p.scale;
  const std::size_t hits = count_at_least(ref, result.statistic, scale);
  result.p_value = static_cast<double>(hits) / count;
  return result;
}

PermutationResult asymptotic(const Prepared& p, const TestSpec& spec) {
  // Within-block permutation covariance of the mean difference:
  // n / (m (n - m)) times the sample covariance of the scores.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p.q, p.q);
  for (const PreparedBlock& b : p.blocks) {
    const double n = static_cast<double>(b.n);
    const double m = static_cast<double>(b.m);
    Eigen::MatrixXd centered = b.scores.rowwise() - (b.total / n).transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1.0);
    sigma += b.weight * b.weight * n / (m * (n - m)) * cov;
  }
  const Eigen::VectorXd observed = observed_statistic(p);
  PermutationResult result;
  result.method = NullMethod::asymptotic;
  if (spec.statistic != Statistic::energy) {
    const double sd = std::sqrt(sigma(0, 0));
    result.statistic = scalarize(observed, spec.sides);
    result.df = 1;
    if (!(sd > 0.0)) {
      result.p_value = 1.0;
      return result;
    }
    const double z = observed(0) / sd;
    result.p_value = spec.sides == Sides::one ? 1.0 - normal_cdf(z) : chi_square_upper_tail(z * z, 1.0);
    return result;
  }
  const Eigen::MatrixXd w = whitening(sigma);
  result.df = static_cast<int>(w.rows());
  if (w.rows() == 0) {
    result.p_value = 1.0;
    return result;
  }
  result.statistic = (w * observed).squaredNorm();
  result.p_value = chi_square_upper_tail(result.statistic, static_cast<double>(result.df));
  return result;
}

}  // namespace

std::size_t Block::treated() const {
  return static_cast<std::size_t>(std::count(treatment.begin(), treatment.end(), std::uint8_t{1}));
}

void validate_blocks(std::span<const Block> data) {
  if (data.empty()) throw Error("no blocks to test");
  for (const Block& b : data) {
    if (b.treatment.size() != b.outcome.size())
      throw Error("block '" + b.id + "': treatment and outcome lengths differ");
    for (std::uint8_t z : b.treatment)
      if (z > 1) throw Error("block '" + b.id + "': treatment must be 0 or 1");
    for (double y : b.outcome)
      if (!std::isfinite(y)) throw Error("block '" + b.id + "': non-finite outcome");
    const std::size_t m = b.treated();
    if (m == 0 || m == b.size())
      throw Error("block '" + b.id + "' is degenerate: " + std::to_string(m) + " of " +
                  std::to_string(b.size()) + " units treated");
  }
}

Eigen::VectorXd midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Eigen::VectorXd ranks(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks(static_cast<Eigen::Index>(order[k])) = mid;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Mean and max absolute distance from each value to all others (n - 1 peers).
void distance_scores(const Eigen::VectorXd& v, Eigen::Ref<Eigen::VectorXd> mean_dist,
                     Eigen::Ref<Eigen::VectorXd> max_dist) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  const double lo = v(order.front());
  const double hi = v(order.back());
  const double total = v.sum();
  double below = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = order[static_cast<std::size_t>(r)];
    const double x = v(i);
    const double above = total - below - x;
    const double sum_abs = (x * static_cast<double>(r) - below) +
                           (above - x * static_cast<double>(n - 1 - r));
    mean_dist(i) = sum_abs / static_cast<double>(n - 1);
    max_dist(i) = std::max(x - lo, hi - x);
    below += x;
  }
}

}  // namespace

EnergyScores energy_scores(std::span<const double> outcomes) {
  if (outcomes.size() < 2) throw Error("energy scores need at least 2 units");
  const auto n = static_cast<Eigen::Index>(outcomes.size());
  const Eigen::Map<const Eigen::VectorXd> y(outcomes.data(), n);
  EnergyScores s(n, 6);
  s.col(0) = y;
  s.col(1) = midranks(outcomes);
  Eigen::VectorXd unused(n);
  distance_scores(y, s.col(2), s.col(4));
  distance_scores(s.col(1), s.col(3), unused);
  s.col(5) = y.array().tanh();
  return s;
}

Eigen::VectorXd block_statistic(std::span<const Block> data, Statistic statistic,
                                std::span<const std::vector<std::uint8_t>> assignment) {
  if (assignment.size() != data.size()) throw Error("assignment does not match the block count");
  std::vector<Block> assigned(data.begin(), data.end());
  for (std::size_t b = 0; b < data.size(); ++b) {
    if (assignment[b].size() != data[b].size())
      throw Error("assignment for block '" + data[b].id + "' has the wrong length");
    assigned[b].treatment = assignment[b];
  }
  return observed_statistic(prepare(assigned, statistic));
}

double assignment_count(std::span<const Block> data) {
  double count = 1.0;
  for (const Block& b : data) {
    const std::size_t n = b.size();
    const std::size_t m = std::min(b.treated(), n - b.treated());
    double c = 1.0;
    for (std::size_t i = 1; i <= m; ++i)
      c = c * static_cast<double>(n - m + i) / static_cast<double>(i);
    count *= std::round(c);
  }
  return count;
}

PermutationResult permutation_test(std::span<const Block> data, const TestSpec& spec,
                                   std::uint64_t stream) {
  const Prepared p = prepare(data, spec.statistic);
  switch (spec.method) {
    case NullMethod::monte_carlo:
      return monte_carlo(p, spec, stream);
    case NullMethod::exact:
      return exact(p, spec, assignment_count(data));
    case NullMethod::asymptotic:
      return asymptotic(p, spec);
    case NullMethod::automatic:
      break;
  }
  const double count = assignment_count(data);
  if (count <= spec.exact_cap) return exact(p, spec, count);
  return monte_carlo(p, spec, stream);
}

}  // namespace treegate
