// Copyright 2026 The ldpmarket Authors
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

// Reference computations shared by the unit and acceptance suites. They
// deliberately avoid calling into the library under test.

#ifndef LDPMARKET_TESTS_ORACLES_H_
#define LDPMARKET_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "ldpmarket/common/random_stream.h"

namespace ldpmarket::testing {

// A true histogram t over n bins, a flip probability f and the exact
// expected ones-count per bin, t_j (1 - f) + N f / 2. f is drawn as 2m/D and
// every count as a multiple of D so the expectation is an integer.
struct ExpectedCountInstance {
  double f = 0;
  int64_t population = 0;
  std::vector<int64_t> true_counts;
  std::vector<int64_t> expected_ones;
};

inline ExpectedCountInstance DrawExpectedCountInstance(RandomStream& rng,
                                                       int n,
                                                       int64_t max_population) {
  ExpectedCountInstance inst;
  const int64_t d = 2 + static_cast<int64_t>(rng.UniformInt(19));  // 2..20
  const int64_t m = static_cast<int64_t>(rng.UniformInt(static_cast<uint64_t>((d + 1) / 2)));
  inst.f = 2.0 * static_cast<double>(m) / static_cast<double>(d);
  const int64_t units = 1 + static_cast<int64_t>(rng.UniformInt(
                                static_cast<uint64_t>(max_population / d)));
  inst.population = units * d;
  inst.true_counts.assign(n, 0);
  for (int64_t u = 0; u < units; ++u) {
    inst.true_counts[rng.UniformInt(static_cast<uint64_t>(n))] += d;
  }
  for (int64_t t : inst.true_counts) {
    // t (1 - 2m/D) + N m / D, all terms integral.
    inst.expected_ones.push_back(t - t / d * 2 * m + inst.population / d * m);
  }
  return inst;
}

// Likelihood of observing `out` from one-hot input `in` under per-bit
// randomized response: a set bit reports 1 with 1 - f/2, a clear bit with f/2.
inline double ReportLikelihood(const std::vector<int>& in,
                               const std::vector<int>& out, double f) {
  double p = 1.0;
  for (size_t j = 0; j < in.size(); ++j) {
    const double p_one = in[j] ? 1.0 - f / 2.0 : f / 2.0;
    p *= out[j] ? p_one : 1.0 - p_one;
  }
  return p;
}

// Largest likelihood ratio over every output and every ordered pair of
// distinct one-hot inputs of length n.
inline double MaxOneHotLikelihoodRatio(int n, double f) {
  double worst = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      std::vector<int> in_a(n, 0), in_b(n, 0);
      in_a[a] = 1;
      in_b[b] = 1;
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> out(n);
        for (int j = 0; j < n; ++j) out[j] = (mask >> j) & 1;
        worst = std::max(worst, ReportLikelihood(in_a, out, f) /
                                    ReportLikelihood(in_b, out, f));
      }
    }
  }
  return worst;
}

// Standard error of the raw estimate for one bin.
inline double RawEstimateStdError(int64_t true_count, int64_t population,
                                  double f) {
  const double p = f / 2.0;
  const double var = static_cast<double>(true_count) * (1 - p) * p +
                     static_cast<double>(population - true_count) * p * (1 - p);
  return std::sqrt(var) / (1.0 - f);
}

}  // namespace ldpmarket::testing

#endif  // LDPMARKET_TESTS_ORACLES_H_
