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

#ifndef LDPMARKET_PROTOCOL_SESSION_H_
#define LDPMARKET_PROTOCOL_SESSION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "ldpmarket/common/random_stream.h"
#include "ldpmarket/ledger/event_log.h"
#include "ldpmarket/ledger/ledger.h"
#include "ldpmarket/protocol/parties.h"
#include "ldpmarket/protocol/survey_config.h"

namespace ldpmarket::protocol {

struct SurveyRunOptions {
  BuiltSurveyConfig config;
  std::vector<OperatorProfile> operators = {};
  uint64_t seed = 0;
  // Operator i randomizes with response_streams[i] when given; otherwise with
  // RandomStream(DeriveSeed(seed, kOperatorResponse, i)).
  std::vector<RandomStream> response_streams = {};
  int64_t operator_share_bps = kDefaultOperatorShareBps;
  uint64_t deadline = 1000;
  std::string config_uri = "artifact://surveys/config.txt";
  // Skip per-operator trace lines (large simulations).
  bool summarize_trace = false;
};

struct SurveyRun {
  // Ok iff the survey reached Settled and the statistics were recovered.
  absl::Status status;
  std::vector<std::string> trace;
  ledger::EventLog log;
  ledger::ContractPhase final_phase = ledger::ContractPhase::kConfigured;
  crypto::Digest contract_id;
  Address authority;
  Address system_operator;
  std::optional<FilterVector> filter;
  std::map<Address, int64_t> payouts;
  std::optional<AggregationOutcome> outcome;
};

// Deterministic addresses for the fixed parties of a seeded run.
Address AuthorityAddress(uint64_t seed);
Address SystemOperatorAddress(uint64_t seed);
Address OperatorAddress(uint64_t seed, uint64_t operator_index);

// Runs configure -> commit -> filter -> deliver -> deposit -> reveal ->
// settle -> decrypt. Operators commit in a seeded random arrival order. When
// the filter cannot reach NR the contract is aborted after its deadline and
// the run returns kFailedPrecondition with the trace so far.
SurveyRun RunSurvey(SurveyRunOptions options);

}  // namespace ldpmarket::protocol

#endif  // LDPMARKET_PROTOCOL_SESSION_H_
