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

// Survey configuration file.
//
// The file is line-oriented text. BuildSurveyConfig always emits the same
// bytes for the same inputs:
//
//   # ldpmarket survey configuration
//   version: 1
//   required_responses: 3
//   fee: 100
//   flip_probability: 0.5
//   choices:
//   - small
//   - large
//   criteria:
//   - region: NSW, VIC
//
// Criteria are sorted by attribute name and allowed values are sorted and
// de-duplicated. The ledger stores the SHA-256 of these exact bytes; parsed
// content is never re-serialized for hashing.

#ifndef LDPMARKET_PROTOCOL_SURVEY_CONFIG_H_
#define LDPMARKET_PROTOCOL_SURVEY_CONFIG_H_

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "ldpmarket/crypto/envelope.h"
#include "ldpmarket/ldp/rappor.h"

namespace ldpmarket::protocol {

struct FilterPredicate {
  std::string attribute;
  std::set<std::string> allowed_values;

  friend bool operator==(const FilterPredicate&,
                         const FilterPredicate&) = default;
};

class FilterCriteria {
 public:
  FilterCriteria() = default;
  // Attribute names must be distinct; an empty list accepts everyone.
  static absl::StatusOr<FilterCriteria> Create(
      std::vector<FilterPredicate> predicates);

  const std::vector<FilterPredicate>& predicates() const { return predicates_; }
  bool empty() const { return predicates_.empty(); }

  friend bool operator==(const FilterCriteria&, const FilterCriteria&) = default;

 private:
  std::vector<FilterPredicate> predicates_;
};

struct SurveyConfiguration {
  ldp::QuerySpec query;
  FilterCriteria criteria;
  int64_t required_responses = 1;
  int64_t fee = 0;
  ldp::PrivacyParams privacy = ldp::PrivacyParams::Default();

  friend bool operator==(const SurveyConfiguration&,
                         const SurveyConfiguration&) = default;
};

struct BuiltSurveyConfig {
  SurveyConfiguration config;
  std::string file_bytes;
  crypto::Digest digest;
};

absl::StatusOr<BuiltSurveyConfig> BuildSurveyConfig(
    ldp::QuerySpec query, FilterCriteria criteria, int64_t required_responses,
    int64_t fee, ldp::PrivacyParams privacy);

absl::StatusOr<SurveyConfiguration> ParseSurveyConfig(std::string_view text);

// Criteria-only file: one "attribute: v1, v2" line per predicate. A leading
// "- " and '#' comment lines are allowed.
absl::StatusOr<FilterCriteria> ParseCriteriaText(std::string_view text);

}  // namespace ldpmarket::protocol

#endif  // LDPMARKET_PROTOCOL_SURVEY_CONFIG_H_
