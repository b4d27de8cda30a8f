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

#include "ldpmarket/protocol/session.h"

#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace ldpmarket::protocol {

namespace {

using ledger::ContractPhase;
using ledger::FormatAddress;

Address AddressFromSeed(uint64_t seed) {
  RandomStream rng(seed);
  Address a;
  rng.FillBytes(a.mutable_span());
  return a;
}

// Appends trace lines and stamps them with the ledger events they produced.
class Tracer {
 public:
  explicit Tracer(std::vector<std::string>* lines) : lines_(lines) {}

  void set_ledger(const Ledger* ledger) {
    ledger_ = ledger;
    seen_ = ledger->event_count();
  }

  void Record(absl::string_view party, absl::string_view action,
              absl::string_view detail = "") {
    std::string line = absl::StrCat("[", party, "] ", action);
    if (!detail.empty()) absl::StrAppend(&line, " ", detail);
    if (ledger_ != nullptr) {
      const size_t now = ledger_->event_count();
      std::vector<std::string> refs;
      for (size_t i = seen_; i < now; ++i) refs.push_back(absl::StrCat("#", i));
      if (!refs.empty()) absl::StrAppend(&line, " -> ev", absl::StrJoin(refs, ","));
      seen_ = now;
    }
    lines_->push_back(std::move(line));
  }

 private:
  std::vector<std::string>* lines_;
  const Ledger* ledger_ = nullptr;
  size_t seen_ = 0;
};

}  // namespace

Address AuthorityAddress(uint64_t seed) {
  return AddressFromSeed(DeriveSeed(seed, seed_domain::kOperatorAddress,
                                    0xa0000000ULL));
}

Address SystemOperatorAddress(uint64_t seed) {
  return AddressFromSeed(DeriveSeed(seed, seed_domain::kOperatorAddress,
                                    0xb0000000ULL));
}

Address OperatorAddress(uint64_t seed, uint64_t operator_index) {
  return AddressFromSeed(
      DeriveSeed(seed, seed_domain::kOperatorAddress, operator_index));
}

SurveyRun RunSurvey(SurveyRunOptions options) {
  SurveyRun run;
  Tracer trace(&run.trace);
  const uint64_t seed = options.seed;
  const SurveyConfiguration& config = options.config.config;
  const size_t n_ops = options.operators.size();

  run.authority = AuthorityAddress(seed);
  run.system_operator = SystemOperatorAddress(seed);
  RandomStream key_stream(DeriveSeed(seed, seed_domain::kSurveyKeys, 0));
  SystemOperator sysop(run.system_operator, crypto::SeededSource(key_stream));
  Authority authority(run.authority);
  FilterBoard board;

  auto finish = [&](std::unique_ptr<Ledger>* ledger, absl::Status status) {
    if (ledger != nullptr && *ledger) {
      run.log = (*ledger)->log();
      run.final_phase = (*ledger)->phase();
    }
    if (!status.ok()) {
      trace.Record("orchestrator", "failed", status.ToString());
    }
    run.status = std::move(status);
    return std::move(run);
  };

  auto created = sysop.SetupSurvey(options.config, run.authority,
                                   options.config_uri, options.deadline);
  if (!created.ok()) return finish(nullptr, created.status());
  std::unique_ptr<Ledger> ledger = *std::move(created);
  run.contract_id = ledger->contract_id();
  trace.set_ledger(ledger.get());
  trace.Record("sysop", "setup_survey",
               absl::StrCat("contract=", run.contract_id.ToHex(),
                            " config=", options.config.digest.ToHex(),
                            " nr=", config.required_responses,
                            " fee=", config.fee));

  std::vector<DroneOperator> operators;
  operators.reserve(n_ops);
  for (size_t i = 0; i < n_ops; ++i) {
    RandomStream response =
        i < options.response_streams.size()
            ? options.response_streams[i]
            : RandomStream(DeriveSeed(seed, seed_domain::kOperatorResponse, i));
    operators.emplace_back(
        options.operators[i], response,
        RandomStream(DeriveSeed(seed, seed_domain::kCipherNonce, i)));
  }

  std::vector<size_t> arrival(n_ops);
  std::iota(arrival.begin(), arrival.end(), size_t{0});
  RandomStream order_rng(DeriveSeed(seed, seed_domain::kArrivalOrder, 0));
  SeededShuffle(std::span<size_t>(arrival), order_rng);

  for (size_t i : arrival) {
    DroneOperator& op = operators[i];
    auto psk = sysop.RegisterInterest(run.contract_id, op.profile().operator_id);
    if (!psk.ok()) return finish(&ledger, psk.status());
    op.ReceivePsk(*psk);
    auto commitment = op.PrepareAndCommit(*ledger, options.config.file_bytes);
    if (!commitment.ok()) return finish(&ledger, commitment.status());
    if (!options.summarize_trace) {
      trace.Record(absl::StrCat("operator ", op.profile().operator_id),
                   "commit",
                   absl::StrCat("address=", FormatAddress(op.address()),
                                " commitment=", commitment->ToHex()));
    }
  }
  if (options.summarize_trace) {
    trace.Record("operators", "commit", absl::StrCat("count=", n_ops));
  }

  auto filter = sysop.BuildAndFinalizeFilter(*ledger, options.operators,
                                             config.criteria, board);
  if (!filter.ok()) {
    trace.Record("sysop", "build_filter", std::string(filter.status().message()));
    const uint64_t now = options.deadline + 1;
    if (absl::Status s = ledger->Abort(now); s.ok()) {
      trace.Record("orchestrator", "abort", absl::StrCat("now=", now));
    }
    return finish(&ledger, filter.status());
  }
  run.filter = *filter;
  trace.Record("sysop", "finalize_filter",
               absl::StrCat("selected=", filter->PopCount(),
                            " of=", filter->bits.size()));

  auto published = authority.LoadPublishedFilter(*ledger, board);
  if (!published.ok()) return finish(&ledger, published.status());
  const ledger::SurveyContract snapshot = ledger->Snapshot();
  for (size_t i : arrival) {
    const DroneOperator& op = operators[i];
    auto message = op.Deliver(*published, snapshot.commitments);
    if (!message.ok()) return finish(&ledger, message.status());
    if (!message->has_value()) continue;
    const DeliveryVerdict verdict = authority.VerifyDelivery(
        **message, snapshot.commitments, *published);
    if (!options.summarize_trace) {
      trace.Record("authority", "verify_delivery",
                   absl::StrCat("index=", (*message)->index, " from=",
                                op.profile().operator_id, " verdict=",
                                DeliveryVerdictName(verdict)));
    }
  }
  if (options.summarize_trace) {
    trace.Record("authority", "verify_delivery",
                 absl::StrCat("accepted=", authority.accepted_count()));
  }

  if (absl::Status s = authority.DepositAndAwaitReveal(*ledger); !s.ok()) {
    return finish(&ledger, s);
  }
  trace.Record("authority", "deposit", absl::StrCat("amount=", config.fee));

  if (absl::Status s = sysop.RevealSecret(*ledger); !s.ok()) {
    return finish(&ledger, s);
  }
  trace.Record("sysop", "reveal_secret");

  auto payouts =
      sysop.PayOperators(*ledger, board, options.operator_share_bps);
  if (!payouts.ok()) return finish(&ledger, payouts.status());
  run.payouts = *payouts;
  int64_t paid = 0;
  for (const auto& [address, amount] : run.payouts) {
    paid += amount;
    if (!options.summarize_trace) {
      trace.Record("sysop", "payout",
                   absl::StrCat(FormatAddress(address), " ", amount));
    }
  }
  trace.Record("sysop", "settle",
               absl::StrCat("paid=", paid, " retained=", config.fee - paid));

  auto outcome = authority.SettleAndDecrypt(*ledger, config);
  if (!outcome.ok()) return finish(&ledger, outcome.status());
  trace.Record("authority", "decrypt_and_aggregate",
               absl::StrCat("vectors=", outcome->decrypted_vectors.size()));
  run.outcome = *std::move(outcome);

  const ledger::EventLog log = ledger->log();
  const ledger::ChainVerdict verdict = ledger::VerifyEventChain(log);
  trace.Record("auditor", "verify_chain", verdict.ok ? "ok" : "broken");
  if (!verdict.ok) {
    return finish(&ledger, absl::InternalError("event chain failed to verify"));
  }
  return finish(&ledger, absl::OkStatus());
}

}  // namespace ldpmarket::protocol
