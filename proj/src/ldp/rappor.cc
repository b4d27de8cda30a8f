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

#include "ldpmarket/ldp/rappor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ldpmarket::ldp {

absl::StatusOr<QuerySpec> QuerySpec::Create(std::vector<std::string> choices) {
  if (choices.size() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "a query needs at least 2 choices, got ", choices.size()));
  }
  std::set<std::string> seen;
  for (const auto& label : choices) {
    if (!seen.insert(label).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate choice label '", label, "'"));
    }
  }
  return QuerySpec(std::move(choices));
}

absl::StatusOr<PrivacyParams> PrivacyParams::Create(double flip_probability) {
  // Written so that NaN fails too.
  if (!(flip_probability >= 0.0 && flip_probability < 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "flip probability f must lie in [0, 1), got ", flip_probability));
  }
  return PrivacyParams(flip_probability);
}

ResponseVector ResponseVector::FromBits(std::span<const uint8_t> bits) {
  ResponseVector rv(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) rv.set_bit(i, bits[i] != 0);
  return rv;
}

absl::StatusOr<ResponseVector> ResponseVector::FromString(
    std::string_view bits) {
  ResponseVector rv(bits.size());
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') {
      return absl::InvalidArgumentError(
          absl::StrCat("bad bit character at position ", i));
    }
    rv.set_bit(i, bits[i] == '1');
  }
  return rv;
}

size_t ResponseVector::PopCount() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string ResponseVector::ToString() const {
  std::string out;
  out.reserve(bits_.size());
  for (uint8_t b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

absl::StatusOr<ResponseVector> EncodeOneHot(int64_t choice_index, int64_t n) {
  if (n < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("vector length must be >= 2, got ", n));
  }
  if (choice_index < 0 || choice_index >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "choice index ", choice_index, " out of range [0, ", n, ")"));
  }
  ResponseVector rv(static_cast<size_t>(n));
  rv.set_bit(static_cast<size_t>(choice_index), true);
  return rv;
}

ResponseVector RandomizeResponse(const ResponseVector& input,
                                 const PrivacyParams& params,
                                 RandomStream& rng) {
  const double half_f = params.f() / 2.0;
  ResponseVector out(input.size());
  for (size_t j = 0; j < input.size(); ++j) {
    // [0, f/2) -> 1, [f/2, f) -> 0, [f, 1) -> keep.
    const double u = rng.UniformDouble();
    if (u < half_f) {
      out.set_bit(j, true);
    } else if (u < params.f()) {
      out.set_bit(j, false);
    } else {
      out.set_bit(j, input.bit(j));
    }
  }
  return out;
}

absl::StatusOr<BitCounts> AccumulateCounts(
    std::span<const ResponseVector> reports) {
  if (reports.empty()) {
    return absl::InvalidArgumentError("cannot accumulate an empty report set");
  }
  const size_t n = reports.front().size();
  BitCounts counts;
  counts.ones_per_position.assign(n, 0);
  for (size_t r = 0; r < reports.size(); ++r) {
    if (reports[r].size() != n) {
      return absl::InvalidArgumentError(
          absl::StrCat("report ", r, " has length ", reports[r].size(),
                       ", expected ", n));
    }
    for (size_t j = 0; j < n; ++j) {
      counts.ones_per_position[j] += reports[r].bit(j) ? 1 : 0;
    }
  }
  counts.report_count = static_cast<int64_t>(reports.size());
  return counts;
}

absl::StatusOr<FrequencyEstimate> EstimateFrequencies(
    const BitCounts& counts, const PrivacyParams& params) {
  if (counts.report_count < 0) {
    return absl::InvalidArgumentError("report count must be non-negative");
  }
  for (size_t j = 0; j < counts.ones_per_position.size(); ++j) {
    const int64_t ones = counts.ones_per_position[j];
    if (ones < 0 || ones > counts.report_count) {
      return absl::InvalidArgumentError(
          absl::StrCat("count ", ones, " at position ", j,
                       " outside [0, ", counts.report_count, "]"));
    }
  }
  const double f = params.f();
  const double n_reports = static_cast<double>(counts.report_count);
  FrequencyEstimate est;
  est.params = params;
  est.report_count = counts.report_count;
  est.raw_estimates.reserve(counts.ones_per_position.size());
  est.clamped_estimates.reserve(counts.ones_per_position.size());
  for (int64_t ones : counts.ones_per_position) {
    const double raw =
        (static_cast<double>(ones) - n_reports * f / 2.0) / (1.0 - f);
    est.raw_estimates.push_back(raw);
    est.clamped_estimates.push_back(std::max(0.0, raw));
  }
  return est;
}

absl::StatusOr<double> EpsilonOf(const PrivacyParams& params,
                                 int hamming_distance) {
  if (hamming_distance < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("hamming distance must be >= 1, got ", hamming_distance));
  }
  const double f = params.f();
  if (f == 0.0) return std::numeric_limits<double>::infinity();
  return hamming_distance * std::log((1.0 - f / 2.0) / (f / 2.0));
}

}  // namespace ldpmarket::ldp
