#include <doctest.h>

#include <cmath>

#include "svrc/estimators.hpp"
#include "svrc/problems.hpp"
#include "svrc/sampling.hpp"
#include "support.hpp"

using namespace svrc;
using test::InlineProblem;

namespace {

EpochSnapshot snapshot_at(const ProblemInstance& problem, const Vector& x) {
  SampleLedger scratch;
  return take_snapshot(problem, x, 1, scratch);
}

// All index multisets of size b over {0..N-1}, as base-N codes.
template <typename Fn>
void for_each_multiset(int big_n, int b, Fn&& fn) {
  const long total = static_cast<long>(std::pow(big_n, b));
  std::vector<int> idx(b);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < b; ++i) {
      idx[i] = static_cast<int>(c % big_n);
      c /= big_n;
    }
    fn(idx);
  }
}

template <typename Fn>
void for_each_subset(int big_n, int b, Fn&& fn) {
  std::vector<int> idx(b);
  for (int i = 0; i < b; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int pos = b - 1;
    while (pos >= 0 && idx[pos] == big_n - b + pos) --pos;
    if (pos < 0) return;
    ++idx[pos];
    for (int i = pos + 1; i < b; ++i) idx[i] = idx[i - 1] + 1;
  }
}

// f_1 quadratic, f_2 a cosine ridge; rho comes from the cosine alone.
std::unique_ptr<InlineProblem> quadratic_plus_cosine() {
  Vector a(2);
  a << 0.8, -0.6;
  std::vector<InlineProblem::Component> comps;
  comps.push_back({[](const Vector& x) { return 0.5 * x.squaredNorm(); },
                   [](const Vector& x) -> Vector { return x; },
                   [](const Vector& x) -> Matrix { return Matrix::Identity(2, 2); }});
  comps.push_back({[a](const Vector& x) { return std::cos(a.dot(x)); },
                   [a](const Vector& x) -> Vector { return -std::sin(a.dot(x)) * a; },
                   [a](const Vector& x) -> Matrix {
                     return -std::cos(a.dot(x)) * (a * a.transpose());
                   }});
  const double norm = a.norm();
  return std::make_unique<InlineProblem>(2, std::move(comps), std::max(1.0, norm * norm),
                                         norm * norm * norm);
}

}  // namespace

TEST_CASE("epsilon thresholds follow the max formulas") {
  Thresholds th = epsilon_thresholds(0.0, 0.3);
  CHECK(th.eps_g == doctest::Approx(0.09));
  CHECK(th.eps_h == doctest::Approx(0.3));

  th = epsilon_thresholds(1.0, 0.01);
  CHECK(th.eps_g == doctest::Approx(1.0));
  CHECK(th.eps_h == doctest::Approx(1.0));

  th = epsilon_thresholds(0.1, 0.04);
  CHECK(th.eps_g == doctest::Approx(0.0016).epsilon(1e-12));
  CHECK(th.eps_h == doctest::Approx(0.04));
}

TEST_CASE("batch sizes: adaptive rules and clamping") {
  const BatchSizeRule with{0.05, SamplingMode::kWithReplacement, 100};
  BatchSizes sizes = batch_sizes(with, 0.0, 0.25, 0.5);
  CHECK(sizes.gradient == 0);
  CHECK(sizes.hessian == 0);

  sizes = batch_sizes(with, 1.0, 0.25, 0.5);
  CHECK(sizes.gradient == 4);
  CHECK(sizes.hessian == 2);
  CHECK(!sizes.gradient_exact);

  // Demands beyond N collapse to a full pass.
  sizes = batch_sizes(with, 10.0, 0.25, 0.5);
  CHECK(sizes.gradient == 100);
  CHECK(sizes.gradient_exact);

  const BatchSizeRule without{0.05, SamplingMode::kWithoutReplacement, 100};
  sizes = batch_sizes(without, 1.0, 0.25, 0.5);
  // 1 / (1/100 + 0.5 / sqrt(33)) = 10.305...
  CHECK(sizes.hessian == 11);
  CHECK(!sizes.hessian_exact);
  // Gradient rule has no sqrt(33) slack: 1 / (1/100 + 0.25) = 3.84...
  CHECK(sizes.gradient == 4);
}

TEST_CASE("svr estimators: anchor cases") {
  auto problem = generate(ProblemKind::kTrigSum, 8, 3, 4);
  std::mt19937_64 rng(10);
  const Vector x_tilde = test::random_vector(rng, 3);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 3, 0.3);

  SampleLedger ledger;
  std::vector<int> empty;
  CHECK(test::bitwise_equal(svr_gradient(*problem, snap, x, empty, ledger), snap.g_tilde));
  CHECK(test::bitwise_equal(svr_hessian(*problem, snap, x, empty, ledger), snap.h_tilde));
  CHECK(ledger.gradient_samples == 0);
  CHECK(ledger.hessian_samples == 0);

  // At the anchor the estimator is bit-exactly the snapshot for any batch.
  std::vector<int> batch{1, 4, 6};
  CHECK(test::bitwise_equal(svr_gradient(*problem, snap, x_tilde, batch, ledger), snap.g_tilde));
  CHECK(test::bitwise_equal(svr_hessian(*problem, snap, x_tilde, batch, ledger), snap.h_tilde));
  CHECK(test::bitwise_equal(corrected_svr_gradient(*problem, snap, x_tilde, batch, ledger),
                            snap.g_tilde));
  CHECK(test::bitwise_equal(corrected_svr_gradient(*problem, snap, x_tilde, empty, ledger),
                            snap.g_tilde));
  CHECK_THROWS_AS(corrected_svr_gradient(*problem, snap, x, empty, ledger), EmptyBatchError);
}

TEST_CASE("sample charging: pairs counted once or twice") {
  auto problem = generate(ProblemKind::kTrigSum, 8, 3, 4);
  std::mt19937_64 rng(11);
  const Vector x_tilde = test::random_vector(rng, 3);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 3, 0.2);
  std::vector<int> batch{0, 2, 5};

  SampleLedger once;
  svr_gradient(*problem, snap, x, batch, once, true);
  svr_hessian(*problem, snap, x, batch, once, true);
  CHECK(once.gradient_samples == 3);
  CHECK(once.hessian_samples == 3);

  SampleLedger both;
  svr_gradient(*problem, snap, x, batch, both, false);
  svr_hessian(*problem, snap, x, batch, both, false);
  CHECK(both.gradient_samples == 6);
  CHECK(both.hessian_samples == 6);

  SampleLedger corrected;
  corrected_svr_gradient(*problem, snap, x, batch, corrected, false);
  CHECK(corrected.gradient_samples == 6);
  CHECK(corrected.hessian_samples == 3);  // per-component Hessians at the anchor
}

TEST_CASE("unbiasedness: exhaustive singleton averages equal the exact quantities") {
  for (ProblemKind kind :
       {ProblemKind::kTrigSum, ProblemKind::kRobustRegression, ProblemKind::kNonconvexLogistic}) {
    auto problem = generate(kind, 9, 4, 21);
    std::mt19937_64 rng(31);
    const Vector x_tilde = test::random_vector(rng, 4);
    const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
    const Vector x = x_tilde + test::random_vector(rng, 4, 0.4);
    const Vector exact_g = exact_gradient(*problem, x);
    const Matrix exact_h = exact_hessian(*problem, x);

    Vector avg_g = Vector::Zero(4);
    Vector avg_c = Vector::Zero(4);
    Matrix avg_h = Matrix::Zero(4, 4);
    SampleLedger scratch;
    const int n = problem->component_count();
    for (int i = 0; i < n; ++i) {
      std::vector<int> single{i};
      avg_g += svr_gradient(*problem, snap, x, single, scratch);
      avg_h += svr_hessian(*problem, snap, x, single, scratch);
      avg_c += corrected_svr_gradient(*problem, snap, x, single, scratch);
    }
    avg_g /= n;
    avg_h /= n;
    avg_c /= n;
    const std::string kind_name = to_string(kind);
    CAPTURE(kind_name);
    CHECK((avg_g - exact_g).norm() <= 1e-12 * (1 + exact_g.norm()));
    CHECK((avg_h - exact_h).norm() <= 1e-12 * (1 + exact_h.norm()));
    CHECK((avg_c - exact_g).norm() <= 1e-12 * (1 + exact_g.norm()));
  }
}

TEST_CASE("second moments: exhaustive singleton variances respect the Lipschitz bounds") {
  auto problem = generate(ProblemKind::kRobustRegression, 10, 3, 77);
  std::mt19937_64 rng(41);
  const Vector x_tilde = test::random_vector(rng, 3);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 3, 0.5);
  const double drift_sq = (x - x_tilde).squaredNorm();
  const Vector exact_g = exact_gradient(*problem, x);
  const Matrix exact_h = exact_hessian(*problem, x);

  double var_g = 0, var_h = 0;
  SampleLedger scratch;
  const int n = problem->component_count();
  for (int i = 0; i < n; ++i) {
    std::vector<int> single{i};
    var_g += (svr_gradient(*problem, snap, x, single, scratch) - exact_g).squaredNorm();
    var_h += (svr_hessian(*problem, snap, x, single, scratch) - exact_h).squaredNorm();
  }
  var_g /= n;
  var_h /= n;
  const double rho = problem->hess_lipschitz();
  const double big_l = problem->grad_lipschitz();
  CHECK(var_h <= rho * rho * drift_sq * (1 + 1e-12));
  CHECK(var_g <= big_l * big_l * drift_sq * (1 + 1e-12));
}

TEST_CASE("corrected gradient: exhaustive variance respects rho^2/(4S) drift^4") {
  auto problem = quadratic_plus_cosine();
  std::mt19937_64 rng(53);
  const Vector x_tilde = test::random_vector(rng, 2);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 2, 0.7);
  const double drift4 = std::pow((x - x_tilde).squaredNorm(), 2);
  const Vector exact_g = exact_gradient(*problem, x);
  const double rho = problem->hess_lipschitz();

  for (int s : {1, 2, 3}) {
    double variance = 0;
    long count = 0;
    SampleLedger scratch;
    for_each_multiset(2, s, [&](const std::vector<int>& idx) {
      variance +=
          (corrected_svr_gradient(*problem, snap, x, idx, scratch) - exact_g).squaredNorm();
      ++count;
    });
    variance /= count;
    CAPTURE(s);
    CHECK(variance <= rho * rho / (4.0 * s) * drift4 * (1 + 1e-12));
  }
}

TEST_CASE("fourth moment of the Hessian estimator stays under 33 rho^4 / b^2") {
  auto problem = generate(ProblemKind::kTrigSum, 30, 3, 5);
  std::mt19937_64 rng(67);
  const Vector x_tilde = test::random_vector(rng, 3);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 3, 0.6);
  const double drift4 = std::pow((x - x_tilde).squaredNorm(), 2);
  const Matrix exact_h = exact_hessian(*problem, x);
  const double rho = problem->hess_lipschitz();
  const int n = problem->component_count();

  for (int b : {2, 4}) {
    double mean = 0, m2 = 0;
    const int trials = 20000;
    IndexSampler sampler(SamplingMode::kWithReplacement, 1000 + b);
    SampleLedger scratch;
    for (int t = 1; t <= trials; ++t) {
      const std::vector<int> idx = sampler.draw(n, b);
      const double err =
          (svr_hessian(*problem, snap, x, idx, scratch) - exact_h).squaredNorm();
      const double y = err * err;
      const double delta = y - mean;
      mean += delta / t;
      m2 += delta * (y - mean);
    }
    const double se = std::sqrt(m2 / (trials - 1.0) / trials);
    CAPTURE(b);
    CHECK(mean <= 33.0 * std::pow(rho, 4) / (b * b) * drift4 + 4 * se);
  }
}

TEST_CASE("adaptive batch sizes keep the estimator moments within the threshold chain") {
  auto problem = generate(ProblemKind::kTrigSum, 40, 4, 6);
  std::mt19937_64 rng(71);
  const Vector x_tilde = test::random_vector(rng, 4);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 4, 0.5);
  const double drift = (x - x_tilde).norm();
  const double xi_prev = 0.3;
  const double eps = 0.05;
  const double rho = problem->hess_lipschitz();
  const double big_l = problem->grad_lipschitz();
  const int n = problem->component_count();

  const Thresholds th = epsilon_thresholds(xi_prev, eps);
  const BatchSizes sizes =
      batch_sizes({eps, SamplingMode::kWithReplacement, n}, drift, th.eps_g, th.eps_h);
  REQUIRE(sizes.hessian >= 1);
  REQUIRE(!sizes.hessian_exact);

  const int trials = 20000;
  std::vector<double> h1, h2, h3, g1, g32;
  h1.reserve(trials);
  const Matrix exact_h = exact_hessian(*problem, x);
  const Vector exact_g = exact_gradient(*problem, x);
  IndexSampler hess_sampler(SamplingMode::kWithReplacement, 424242);
  IndexSampler grad_sampler(SamplingMode::kWithReplacement, 515151);
  SampleLedger scratch;
  for (int t = 0; t < trials; ++t) {
    const double he =
        (svr_hessian(*problem, snap, x, hess_sampler.draw(n, sizes.hessian), scratch) - exact_h)
            .norm();
    h1.push_back(he);
    h2.push_back(he * he);
    h3.push_back(he * he * he);
    const double ge =
        (svr_gradient(*problem, snap, x, grad_sampler.draw(n, sizes.gradient), scratch) - exact_g)
            .norm();
    g1.push_back(ge);
    g32.push_back(std::pow(ge, 1.5));
  }
  auto mean_se = [&](const std::vector<double>& ys) {
    double mean = 0;
    for (double y : ys) mean += y;
    mean /= ys.size();
    double var = 0;
    for (double y : ys) var += (y - mean) * (y - mean);
    var /= (ys.size() - 1.0);
    return std::pair<double, double>(mean, std::sqrt(var / ys.size()));
  };
  const double sqrt_eps = std::sqrt(eps);
  auto [m_h1, se_h1] = mean_se(h1);
  CHECK(m_h1 <= rho * (xi_prev + sqrt_eps) + 4 * se_h1);
  auto [m_h2, se_h2] = mean_se(h2);
  CHECK(m_h2 <= rho * rho * (xi_prev * xi_prev + eps) + 4 * se_h2);
  auto [m_h3, se_h3] = mean_se(h3);
  CHECK(m_h3 <= std::pow(33.0, 0.75) * std::pow(rho, 3) *
                    (std::pow(xi_prev, 3) + std::pow(eps, 1.5)) +
                4 * se_h3);
  auto [m_g1, se_g1] = mean_se(g1);
  CHECK(m_g1 <= big_l * (xi_prev * xi_prev + eps) + 4 * se_g1);
  auto [m_g32, se_g32] = mean_se(g32);
  CHECK(m_g32 <=
        std::pow(big_l, 1.5) * (std::pow(xi_prev, 3) + std::pow(eps, 1.5)) + 4 * se_g32);
}

TEST_CASE("without-replacement estimator moments never exceed with-replacement") {
  auto problem = generate(ProblemKind::kRobustRegression, 6, 2, 8);
  std::mt19937_64 rng(83);
  const Vector x_tilde = test::random_vector(rng, 2);
  const EpochSnapshot snap = snapshot_at(*problem, x_tilde);
  const Vector x = x_tilde + test::random_vector(rng, 2, 0.5);
  const Matrix exact_h = exact_hessian(*problem, x);
  const int n = problem->component_count();
  SampleLedger scratch;

  for (int b = 1; b <= 4; ++b) {
    double with2 = 0, with4 = 0;
    long with_count = 0;
    for_each_multiset(n, b, [&](const std::vector<int>& idx) {
      const double e = (svr_hessian(*problem, snap, x, idx, scratch) - exact_h).squaredNorm();
      with2 += e;
      with4 += e * e;
      ++with_count;
    });
    with2 /= with_count;
    with4 /= with_count;

    double wo2 = 0, wo4 = 0;
    long wo_count = 0;
    for_each_subset(n, b, [&](const std::vector<int>& idx) {
      const double e = (svr_hessian(*problem, snap, x, idx, scratch) - exact_h).squaredNorm();
      wo2 += e;
      wo4 += e * e;
      ++wo_count;
    });
    wo2 /= wo_count;
    wo4 /= wo_count;

    CAPTURE(b);
    CHECK(wo2 <= with2 * (1 + 1e-12) + 1e-15);
    CHECK(wo4 <= with4 * (1 + 1e-12) + 1e-15);
  }
}
