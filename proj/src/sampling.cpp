#include "svrc/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "svrc/errors.hpp"
#include "svrc/rng.hpp"

namespace svrc {

IndexSampler::IndexSampler(SamplingMode mode, std::uint64_t stream_seed)
    : mode_(mode), rng_(splitmix64(stream_seed)) {}

std::vector<int> IndexSampler::draw(int population, int count) {
  if (population < 0 || count < 0) throw std::invalid_argument("draw: negative size");
  if (count == 0) return {};
  if (population == 0) throw BatchTooLargeError("draw: empty population");
  std::vector<int> out;
  out.reserve(count);
  if (mode_ == SamplingMode::kWithReplacement) {
    for (int i = 0; i < count; ++i)
      out.push_back(static_cast<int>(uniform_below(rng_, population)));
    std::sort(out.begin(), out.end());
    return out;
  }
  if (count > population)
    throw BatchTooLargeError("draw: " + std::to_string(count) +
                             " without replacement from population " + std::to_string(population));
  // Selection sampling; every n-subset equally likely, output ascending.
  int needed = count;
  for (int i = 0; i < population && needed > 0; ++i) {
    const std::uint64_t remaining = population - i;
    if (uniform_below(rng_, remaining) < static_cast<std::uint64_t>(needed)) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

namespace {

// One additive term coeff * prod_k (n - k) / (N - k). A zero numerator factor
// annihilates the term before any later division, which is exactly the
// combinatorial content: the coefficient counts injective index patterns, and
// unrealizable patterns never query the population moments.
double falling_term(double coeff, int n, int big_n, std::initializer_list<int> offsets) {
  double value = coeff;
  for (int k : offsets) {
    if (value == 0.0) return 0.0;
    value *= static_cast<double>(n - k);
    if (value == 0.0) return 0.0;
    const int den = big_n - k;
    if (den == 0)
      throw std::invalid_argument("moment formula undefined for N=" + std::to_string(big_n) +
                                  ", n=" + std::to_string(n));
    value /= static_cast<double>(den);
  }
  return value;
}

double binomial_count(int n, int k) {
  double c = 1;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

}  // namespace

MomentReport without_replacement_moments(const std::vector<Matrix>& population, int n) {
  const int big_n = static_cast<int>(population.size());
  if (big_n < 1) throw std::invalid_argument("moments: empty population");
  if (n < 1 || n > big_n) throw std::invalid_argument("moments: need 1 <= n <= N");
  const long rows = population.front().rows();
  const long cols = population.front().cols();
  Matrix mean = Matrix::Zero(rows, cols);
  double max_norm = 0;
  for (const Matrix& x : population) {
    if (x.rows() != rows || x.cols() != cols)
      throw std::invalid_argument("moments: population shape mismatch");
    mean += x;
    max_norm = std::max(max_norm, x.norm());
  }
  mean /= big_n;
  if (mean.norm() > 1e-12 * std::max(1.0, max_norm))
    throw CenteringError("moments: population mean is not zero (|mean|=" +
                         std::to_string(mean.norm()) + ")");

  MomentReport report;

  // Elementary expectations by exact enumeration over ordered pairs.
  double e2 = 0, e4 = 0, cross2 = 0, prod22 = 0;
  for (int i = 0; i < big_n; ++i) {
    const double sq = population[i].squaredNorm();
    e2 += sq;
    e4 += sq * sq;
  }
  e2 /= big_n;
  e4 /= big_n;
  if (big_n > 1) {
    for (int i = 0; i < big_n; ++i) {
      for (int j = 0; j < big_n; ++j) {
        if (i == j) continue;
        const double ip = population[i].cwiseProduct(population[j]).sum();
        cross2 += ip * ip;
        prod22 += population[i].squaredNorm() * population[j].squaredNorm();
      }
    }
    cross2 /= static_cast<double>(big_n) * (big_n - 1);
    prod22 /= static_cast<double>(big_n) * (big_n - 1);
  }

  report.r1 = falling_term(static_cast<double>(n), n, big_n, {}) -
              falling_term(4.0 * n, n, big_n, {1}) + falling_term(6.0 * n, n, big_n, {1, 2}) -
              falling_term(3.0 * n, n, big_n, {1, 2, 3});
  report.r2 = 2.0 * n * (n - 1) - falling_term(4.0 * n * (n - 1.0), n, big_n, {2}) +
              falling_term(2.0 * n * (n - 1.0), n, big_n, {2, 3});
  report.r3 = 1.0 * n * (n - 1) - falling_term(2.0 * n * (n - 1.0), n, big_n, {2}) +
              falling_term(1.0 * n * (n - 1.0), n, big_n, {2, 3});

  const double n4 = std::pow(static_cast<double>(n), 4);
  report.formula_second = (1.0 - falling_term(1.0, n, big_n, {1})) * e2 / n;
  report.formula_fourth = (report.r1 * e4 + report.r2 * cross2 + report.r3 * prod22) / n4;

  // Oracle route: average over all n-subsets (the mean is symmetric, so the
  // unordered enumeration equals the ordered one).
  const double subsets = binomial_count(big_n, n);
  if (subsets > 2e6) throw std::invalid_argument("moments: enumeration too large");
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  double acc2 = 0, acc4 = 0;
  while (true) {
    Matrix sum = Matrix::Zero(rows, cols);
    for (int i : pick) sum += population[i];
    const double sq = sum.squaredNorm() / (static_cast<double>(n) * n);
    acc2 += sq;
    acc4 += sq * sq;
    int pos = n - 1;
    while (pos >= 0 && pick[pos] == big_n - n + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int i = pos + 1; i < n; ++i) pick[i] = pick[i - 1] + 1;
  }
  report.second_moment = acc2 / subsets;
  report.fourth_moment = acc4 / subsets;
  return report;
}

MomentEstimate empirical_moment(const std::function<Matrix(std::mt19937_64&)>& draw_mean, int p,
                                int trials, std::uint64_t seed) {
  if (p != 2 && p != 4) throw std::invalid_argument("empirical_moment: p must be 2 or 4");
  if (trials < 10000) throw std::invalid_argument("empirical_moment: need trials >= 10^4");
  std::mt19937_64 rng(splitmix64(seed));
  double mean = 0, m2 = 0;
  for (int t = 1; t <= trials; ++t) {
    const double sq = draw_mean(rng).squaredNorm();
    const double y = (p == 2) ? sq : sq * sq;
    const double delta = y - mean;
    mean += delta / t;
    m2 += delta * (y - mean);
  }
  MomentEstimate est;
  est.value = mean;
  est.standard_error = std::sqrt(m2 / (static_cast<double>(trials) - 1) / trials);
  return est;
}

}  // namespace svrc
