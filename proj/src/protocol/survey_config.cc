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

#include "ldpmarket/protocol/survey_config.h"

#include <algorithm>
#include <charconv>
#include <optional>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace ldpmarket::protocol {

namespace {

constexpr absl::string_view kHeader = "# ldpmarket survey configuration";

bool HasControlChars(absl::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x20 || c == 0x7f;
  });
}

// Labels and values are stored trimmed, so they must round-trip through the
// parser's whitespace stripping.
absl::Status CheckToken(absl::string_view what, absl::string_view token,
                        absl::string_view forbidden) {
  if (token.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(what, " is empty"));
  }
  if (HasControlChars(token) ||
      absl::StripAsciiWhitespace(token).size() != token.size() ||
      token.find_first_of(forbidden) != absl::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, " '", token, "' contains reserved characters"));
  }
  return absl::OkStatus();
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

absl::StatusOr<double> ParseDouble(absl::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return absl::InvalidArgumentError(absl::StrCat("not a number: '", s, "'"));
  }
  return v;
}

absl::StatusOr<FilterPredicate> ParsePredicate(absl::string_view line) {
  std::pair<absl::string_view, absl::string_view> kv =
      absl::StrSplit(line, absl::MaxSplits(':', 1));
  if (line.find(':') == absl::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("criterion '", line, "' lacks ':'"));
  }
  FilterPredicate p;
  p.attribute = std::string(absl::StripAsciiWhitespace(kv.first));
  for (absl::string_view v : absl::StrSplit(kv.second, ',')) {
    v = absl::StripAsciiWhitespace(v);
    if (v.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("criterion '", p.attribute, "' has an empty value"));
    }
    p.allowed_values.emplace(v);
  }
  return p;
}

}  // namespace

absl::StatusOr<FilterCriteria> FilterCriteria::Create(
    std::vector<FilterPredicate> predicates) {
  std::sort(predicates.begin(), predicates.end(),
            [](const FilterPredicate& a, const FilterPredicate& b) {
              return a.attribute < b.attribute;
            });
  for (size_t i = 0; i < predicates.size(); ++i) {
    const FilterPredicate& p = predicates[i];
    if (absl::Status s = CheckToken("attribute name", p.attribute, ":,#");
        !s.ok()) {
      return s;
    }
    if (i > 0 && predicates[i - 1].attribute == p.attribute) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute '", p.attribute, "' appears twice"));
    }
    if (p.allowed_values.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute '", p.attribute, "' allows no values"));
    }
    for (const std::string& v : p.allowed_values) {
      if (absl::Status s = CheckToken("allowed value", v, ","); !s.ok()) {
        return s;
      }
    }
  }
  FilterCriteria c;
  c.predicates_ = std::move(predicates);
  return c;
}

absl::StatusOr<BuiltSurveyConfig> BuildSurveyConfig(
    ldp::QuerySpec query, FilterCriteria criteria, int64_t required_responses,
    int64_t fee, ldp::PrivacyParams privacy) {
  if (required_responses < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "required responses must be >= 1, got ", required_responses));
  }
  if (fee < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("fee must be non-negative, got ", fee));
  }
  for (const std::string& label : query.choices()) {
    if (absl::Status s = CheckToken("choice label", label, ""); !s.ok()) {
      return s;
    }
  }

  std::string text = absl::StrCat(kHeader, "\nversion: 1\n",
                                  "required_responses: ", required_responses,
                                  "\nfee: ", fee, "\nflip_probability: ",
                                  FormatDouble(privacy.f()), "\nchoices:\n");
  for (const std::string& label : query.choices()) {
    absl::StrAppend(&text, "- ", label, "\n");
  }
  absl::StrAppend(&text, "criteria:\n");
  for (const FilterPredicate& p : criteria.predicates()) {
    absl::StrAppend(&text, "- ", p.attribute, ": ",
                    absl::StrJoin(p.allowed_values, ", "), "\n");
  }

  BuiltSurveyConfig built{
      SurveyConfiguration{std::move(query), std::move(criteria),
                          required_responses, fee, privacy},
      std::move(text), crypto::Digest()};
  built.digest = crypto::ComputeDigest(built.file_bytes);
  return built;
}

absl::StatusOr<SurveyConfiguration> ParseSurveyConfig(std::string_view input) {
  const absl::string_view text(input.data(), input.size());
  enum class Section { kTop, kChoices, kCriteria };
  Section section = Section::kTop;
  std::optional<int64_t> required, fee;
  std::optional<double> flip;
  bool saw_version = false;
  std::vector<std::string> choices;
  std::vector<FilterPredicate> predicates;

  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    auto err = [line_no](absl::string_view msg) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": ", msg));
    };
    if (line.empty() || line.front() == '#') continue;

    if (absl::ConsumePrefix(&line, "- ")) {
      if (section == Section::kChoices) {
        choices.emplace_back(absl::StripAsciiWhitespace(line));
      } else if (section == Section::kCriteria) {
        auto p = ParsePredicate(line);
        if (!p.ok()) return err(p.status().message());
        predicates.push_back(*std::move(p));
      } else {
        return err("list item outside a list section");
      }
      continue;
    }
    if (line == "choices:") {
      section = Section::kChoices;
      continue;
    }
    if (line == "criteria:") {
      section = Section::kCriteria;
      continue;
    }

    std::pair<absl::string_view, absl::string_view> kv =
        absl::StrSplit(line, absl::MaxSplits(": ", 1));
    if (line.find(": ") == absl::string_view::npos) {
      return err(absl::StrCat("unrecognised line '", line, "'"));
    }
    section = Section::kTop;
    int64_t int_value = 0;
    if (kv.first == "version") {
      if (kv.second != "1") return err("unsupported version");
      saw_version = true;
    } else if (kv.first == "required_responses") {
      if (!absl::SimpleAtoi(kv.second, &int_value)) return err("bad integer");
      required = int_value;
    } else if (kv.first == "fee") {
      if (!absl::SimpleAtoi(kv.second, &int_value)) return err("bad integer");
      fee = int_value;
    } else if (kv.first == "flip_probability") {
      auto v = ParseDouble(kv.second);
      if (!v.ok()) return err(v.status().message());
      flip = *v;
    } else {
      return err(absl::StrCat("unknown key '", kv.first, "'"));
    }
  }

  if (!saw_version || !required || !fee || !flip) {
    return absl::InvalidArgumentError(
        "config is missing one of version, required_responses, fee, "
        "flip_probability");
  }
  auto query = ldp::QuerySpec::Create(std::move(choices));
  if (!query.ok()) return query.status();
  auto criteria = FilterCriteria::Create(std::move(predicates));
  if (!criteria.ok()) return criteria.status();
  auto privacy = ldp::PrivacyParams::Create(*flip);
  if (!privacy.ok()) return privacy.status();
  if (*required < 1 || *fee < 0) {
    return absl::InvalidArgumentError("required_responses or fee out of range");
  }
  return SurveyConfiguration{*std::move(query), *std::move(criteria), *required,
                             *fee, *privacy};
}

absl::StatusOr<FilterCriteria> ParseCriteriaText(std::string_view input) {
  const absl::string_view text(input.data(), input.size());
  std::vector<FilterPredicate> predicates;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    absl::ConsumePrefix(&line, "- ");
    auto p = ParsePredicate(line);
    if (!p.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "criteria line ", line_no, ": ", p.status().message()));
    }
    predicates.push_back(*std::move(p));
  }
  return FilterCriteria::Create(std::move(predicates));
}

}  // namespace ldpmarket::protocol
