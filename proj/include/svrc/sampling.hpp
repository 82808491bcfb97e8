#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "svrc/types.hpp"

namespace svrc {

// Seeded index sampler. Without replacement draws a uniform n-subset of
// {0..N-1} (selection sampling, ascending output); with replacement an i.i.d.
// multiset, sorted ascending. n = 0 is legal and returns the empty batch.
class IndexSampler {
 public:
  IndexSampler(SamplingMode mode, std::uint64_t stream_seed);

  std::vector<int> draw(int population, int count);
  SamplingMode mode() const { return mode_; }

 private:
  SamplingMode mode_;
  std::mt19937_64 rng_;
};

// Moments of the without-replacement sample mean of a zero-mean population,
// computed two independent ways: exhaustive enumeration over all n-subsets
// (second_moment / fourth_moment) and the closed forms
//   second = (1/n)(1 - (n-1)/(N-1)) E||Z1||_F^2
//   fourth = (1/n^4)(r1 E||Z1||_F^4 + r2 E<Z1,Z2>^2 + r3 E||Z1||_F^2||Z2||_F^2)
// with the elementary expectations enumerated over ordered pairs.
struct MomentReport {
  double second_moment = 0;
  double fourth_moment = 0;
  double formula_second = 0;
  double formula_fourth = 0;
  double r1 = 0;
  double r2 = 0;
  double r3 = 0;
};

MomentReport without_replacement_moments(const std::vector<Matrix>& population, int n);

struct MomentEstimate {
  double value = 0;
  double standard_error = 0;
};

// Monte-Carlo estimate of E||M||_F^p for p in {2,4}, where draw_mean produces
// one realization of the averaged matrix per call. trials >= 10^4.
MomentEstimate empirical_moment(const std::function<Matrix(std::mt19937_64&)>& draw_mean, int p,
                                int trials, std::uint64_t seed);

}  // namespace svrc
