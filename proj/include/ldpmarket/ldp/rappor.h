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

// One-time RAPPOR over a one-hot choice vector.
//
// A respondent with choice c builds the one-hot vector R (bit c set) and, for
// every bit independently, keeps it with probability 1 - f or replaces it with
// a fair coin with probability f. The aggregator observes, per position j, the
// number of reports with bit j set and inverts the channel:
//
//   E[ones_j] = t_j (1 - f) + N f / 2   =>   t_j ~ (ones_j - N f / 2) / (1 - f)
//
// Bit positions are 0-based and follow QuerySpec order.

#ifndef LDPMARKET_LDP_RAPPOR_H_
#define LDPMARKET_LDP_RAPPOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ldpmarket/common/random_stream.h"

namespace ldpmarket::ldp {

inline constexpr double kDefaultFlipProbability = 0.5;

// The ordered list of choices c_1..c_n a survey asks about.
class QuerySpec {
 public:
  // Requires at least two pairwise-distinct labels.
  static absl::StatusOr<QuerySpec> Create(std::vector<std::string> choices);

  size_t size() const { return choices_.size(); }
  const std::vector<std::string>& choices() const { return choices_; }

  friend bool operator==(const QuerySpec&, const QuerySpec&) = default;

 private:
  explicit QuerySpec(std::vector<std::string> choices)
      : choices_(std::move(choices)) {}

  std::vector<std::string> choices_;
};

// Flip probability f in [0, 1).
class PrivacyParams {
 public:
  static absl::StatusOr<PrivacyParams> Create(double flip_probability);
  static PrivacyParams Default() { return PrivacyParams(kDefaultFlipProbability); }

  double f() const { return f_; }

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;

 private:
  explicit PrivacyParams(double f) : f_(f) {}

  double f_;
};

class ResponseVector {
 public:
  ResponseVector() = default;
  explicit ResponseVector(size_t n) : bits_(n, 0) {}
  // Any nonzero entry is treated as a set bit.
  static ResponseVector FromBits(std::span<const uint8_t> bits);
  // Parses a string of '0'/'1' characters, position 0 first.
  static absl::StatusOr<ResponseVector> FromString(std::string_view bits);

  size_t size() const { return bits_.size(); }
  bool bit(size_t i) const { return bits_[i] != 0; }
  void set_bit(size_t i, bool value) { bits_[i] = value ? 1 : 0; }
  size_t PopCount() const;
  std::span<const uint8_t> bits() const { return bits_; }
  std::string ToString() const;

  friend bool operator==(const ResponseVector&, const ResponseVector&) = default;

 private:
  std::vector<uint8_t> bits_;
};

struct BitCounts {
  std::vector<int64_t> ones_per_position;
  int64_t report_count = 0;
};

struct FrequencyEstimate {
  // May be negative.
  std::vector<double> raw_estimates;
  // max(0, raw).
  std::vector<double> clamped_estimates;
  PrivacyParams params = PrivacyParams::Default();
  int64_t report_count = 0;
};

// One-hot vector of length n with bit `choice_index` set.
absl::StatusOr<ResponseVector> EncodeOneHot(int64_t choice_index, int64_t n);

// Applies the permanent randomized response. Consumes exactly one uniform
// draw per bit from `rng`, so the stream position after the call depends only
// on the vector length.
ResponseVector RandomizeResponse(const ResponseVector& input,
                                 const PrivacyParams& params,
                                 RandomStream& rng);

absl::StatusOr<BitCounts> AccumulateCounts(
    std::span<const ResponseVector> reports);

absl::StatusOr<FrequencyEstimate> EstimateFrequencies(
    const BitCounts& counts, const PrivacyParams& params);

// hamming_distance * ln((1 - f/2) / (f/2)). One-hot neighbours differ in two
// positions, so the per-report budget is EpsilonOf(params, 2). With f == 0
// there is no privacy and the result is +infinity.
absl::StatusOr<double> EpsilonOf(const PrivacyParams& params,
                                 int hamming_distance);

}  // namespace ldpmarket::ldp

#endif  // LDPMARKET_LDP_RAPPOR_H_
