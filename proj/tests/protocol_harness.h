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

// Drives the protocol roles step by step so tests can stop or interfere
// between steps. Operators commit in the order of `eligible`; operator i is
// eligible iff eligible[i], via a region attribute and a region criterion.

#ifndef LDPMARKET_TESTS_PROTOCOL_HARNESS_H_
#define LDPMARKET_TESTS_PROTOCOL_HARNESS_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "ldpmarket/protocol/parties.h"
#include "ldpmarket/protocol/session.h"

namespace ldpmarket::testing {

struct ManualSurvey {
  explicit ManualSurvey(protocol::BuiltSurveyConfig b) : built(std::move(b)) {}

  RandomStream key_stream{0};
  protocol::BuiltSurveyConfig built;
  protocol::FilterBoard board;
  std::unique_ptr<protocol::SystemOperator> sysop;
  std::unique_ptr<protocol::Authority> authority;
  std::unique_ptr<ledger::Ledger> ledger;
  std::vector<protocol::OperatorProfile> profiles;
  std::vector<protocol::DroneOperator> operators;
  std::optional<protocol::FilterVector> filter;

  absl::Status CommitAll() {
    for (auto& op : operators) {
      auto psk = sysop->RegisterInterest(ledger->contract_id(),
                                         op.profile().operator_id);
      if (!psk.ok()) return psk.status();
      op.ReceivePsk(*psk);
      auto c = op.PrepareAndCommit(*ledger, built.file_bytes);
      if (!c.ok()) return c.status();
    }
    return absl::OkStatus();
  }

  absl::Status Filter() {
    auto f = sysop->BuildAndFinalizeFilter(*ledger, profiles,
                                           built.config.criteria, board);
    if (!f.ok()) return f.status();
    filter = *f;
    return absl::OkStatus();
  }

  // Every operator delivers if selected; returns the number accepted.
  absl::StatusOr<size_t> DeliverAll() {
    auto published = authority->LoadPublishedFilter(*ledger, board);
    if (!published.ok()) return published.status();
    const ledger::CommitmentIndex m = ledger->Snapshot().commitments;
    for (const auto& op : operators) {
      auto msg = op.Deliver(*published, m);
      if (!msg.ok()) return msg.status();
      if (msg->has_value()) authority->VerifyDelivery(**msg, m, *published);
    }
    return authority->accepted_count();
  }
};

inline protocol::BuiltSurveyConfig RegionSurveyConfig(int n_choices,
                                                      int64_t nr, int64_t fee,
                                                      double f) {
  std::vector<std::string> labels;
  for (int i = 1; i <= n_choices; ++i) labels.push_back(absl::StrCat("c", i));
  auto criteria = protocol::FilterCriteria::Create({{"region", {"NSW"}}});
  return *protocol::BuildSurveyConfig(*ldp::QuerySpec::Create(labels),
                                      *criteria, nr, fee,
                                      *ldp::PrivacyParams::Create(f));
}

inline std::unique_ptr<ManualSurvey> StartSurvey(
    uint64_t seed, const std::vector<bool>& eligible, int64_t nr,
    int64_t fee = 100, double f = 0.5, int n_choices = 5) {
  auto s = std::make_unique<ManualSurvey>(
      RegionSurveyConfig(n_choices, nr, fee, f));
  s->key_stream = RandomStream(DeriveSeed(seed, seed_domain::kSurveyKeys, 0));
  s->sysop = std::make_unique<protocol::SystemOperator>(
      protocol::SystemOperatorAddress(seed), crypto::SeededSource(s->key_stream));
  s->authority =
      std::make_unique<protocol::Authority>(protocol::AuthorityAddress(seed));
  auto ledger = s->sysop->SetupSurvey(s->built, s->authority->address(),
                                      "artifact://test", 100);
  if (!ledger.ok()) return nullptr;
  s->ledger = *std::move(ledger);
  for (size_t i = 0; i < eligible.size(); ++i) {
    protocol::OperatorProfile p;
    p.operator_id = absl::StrCat("op-", i);
    p.addresses = {protocol::OperatorAddress(seed, i)};
    p.attributes["region"] = eligible[i] ? "NSW" : "VIC";
    p.true_choice = static_cast<int64_t>(i % static_cast<size_t>(n_choices));
    s->profiles.push_back(p);
  }
  for (size_t i = 0; i < eligible.size(); ++i) {
    s->operators.emplace_back(
        s->profiles[i],
        RandomStream(DeriveSeed(seed, seed_domain::kOperatorResponse, i)),
        RandomStream(DeriveSeed(seed, seed_domain::kCipherNonce, i)));
  }
  return s;
}

}  // namespace ldpmarket::testing

#endif  // LDPMARKET_TESTS_PROTOCOL_HARNESS_H_
