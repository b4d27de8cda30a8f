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

#include "ldpmarket/protocol/parties.h"

#include <algorithm>

#include "absl/strings/str_cat.h"

namespace ldpmarket::protocol {

using ledger::ContractPhase;
using ledger::EventKind;
using ledger::FormatAddress;

bool EvaluateCriteria(const OperatorProfile& profile,
                      const FilterCriteria& criteria) {
  for (const FilterPredicate& p : criteria.predicates()) {
    auto it = profile.attributes.find(p.attribute);
    if (it == profile.attributes.end()) return false;
    if (!p.allowed_values.contains(it->second)) return false;
  }
  return true;
}

size_t FilterVector::PopCount() const {
  return static_cast<size_t>(std::count(bits.begin(), bits.end(), 1));
}

absl::StatusOr<FilterVector> FilterVector::Decode(ByteSpan data) {
  auto bits = crypto::DecodeBitVector(data);
  if (!bits.ok()) return bits.status();
  return FilterVector{*std::move(bits)};
}

absl::string_view DeliveryVerdictName(DeliveryVerdict verdict) {
  switch (verdict) {
    case DeliveryVerdict::kAccepted: return "accepted";
    case DeliveryVerdict::kIndexOutOfRange: return "index-out-of-range";
    case DeliveryVerdict::kHashMismatch: return "hash-mismatch";
    case DeliveryVerdict::kIneligible: return "ineligible";
    case DeliveryVerdict::kDuplicate: return "duplicate";
  }
  return "unknown";
}

void FilterBoard::Publish(const Digest& contract_id, Bytes encoded_filter) {
  std::lock_guard<std::mutex> lock(mu_);
  published_[contract_id] = std::move(encoded_filter);
}

std::optional<Bytes> FilterBoard::Fetch(const Digest& contract_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = published_.find(contract_id);
  if (it == published_.end()) return std::nullopt;
  return it->second;
}

std::map<Address, int64_t> ComputePayoutSplit(
    int64_t fee, std::span<const Address> eligible, int64_t share_bps) {
  std::map<Address, int64_t> out;
  if (eligible.empty()) return out;
  const int64_t pool = fee * share_bps / 10000;
  const int64_t share = pool / static_cast<int64_t>(eligible.size());
  for (const Address& a : eligible) out[a] = share;
  return out;
}

// ---- system operator -------------------------------------------------------

SystemOperator::SystemOperator(Address address, crypto::ByteSource key_source)
    : address_(address), key_source_(std::move(key_source)) {}

absl::StatusOr<std::unique_ptr<Ledger>> SystemOperator::SetupSurvey(
    const BuiltSurveyConfig& config, const Address& authority,
    std::string config_uri, uint64_t deadline) {
  const auto psk = crypto::DrawFixed<PreSharedKey>(key_source_);
  const auto n1 = crypto::DrawFixed<crypto::Nonce>(key_source_);
  auto n2 = crypto::DrawFixed<crypto::Nonce>(key_source_);
  while (n2 == n1) n2 = crypto::DrawFixed<crypto::Nonce>(key_source_);

  const crypto::Secret s1 = crypto::HmacDerive(psk, n1);
  const crypto::Secret s2 = crypto::HmacDerive(psk, n2);

  ledger::ContractTerms terms;
  terms.config_uri = std::move(config_uri);
  terms.config_digest = config.digest;
  terms.required_responses = config.config.required_responses;
  terms.fee = config.config.fee;
  terms.n1 = n1;
  terms.n2 = n2;
  terms.s1 = s1;
  terms.h_s2 = crypto::ComputeDigest(s2.span());
  terms.deadline = deadline;
  terms.authority = authority;
  terms.system_operator = address_;

  auto ledger = Ledger::CreateContract(std::move(terms));
  if (!ledger.ok()) return ledger.status();
  surveys_[(*ledger)->contract_id()] = SurveySecrets{psk, s2, {}};
  return ledger;
}

absl::StatusOr<const SystemOperator::SurveySecrets*> SystemOperator::Find(
    const Digest& contract_id) const {
  auto it = surveys_.find(contract_id);
  if (it == surveys_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no survey set up with contract ", contract_id.ToHex()));
  }
  return &it->second;
}

absl::StatusOr<PreSharedKey> SystemOperator::RegisterInterest(
    const Digest& contract_id, const std::string& operator_id) {
  auto it = surveys_.find(contract_id);
  if (it == surveys_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no survey set up with contract ", contract_id.ToHex()));
  }
  it->second.psk_recipients.push_back(operator_id);
  return it->second.psk;
}

std::vector<std::string> SystemOperator::PskRecipients(
    const Digest& contract_id) const {
  auto secrets = Find(contract_id);
  return secrets.ok() ? (*secrets)->psk_recipients : std::vector<std::string>{};
}

absl::StatusOr<FilterVector> SystemOperator::BuildAndFinalizeFilter(
    Ledger& ledger, std::span<const OperatorProfile> known_operators,
    const FilterCriteria& criteria, FilterBoard& board) {
  if (ledger.phase() != ContractPhase::kCollecting) {
    return absl::FailedPreconditionError(
        "filter can only be built while collecting");
  }
  std::map<Address, const OperatorProfile*> by_address;
  for (const OperatorProfile& p : known_operators) {
    for (const Address& a : p.addresses) by_address[a] = &p;
  }

  // The log gives arrival order; the index built from the same log snapshot
  // gives sorted positions.
  const ledger::EventLog log = ledger.log();
  std::vector<Address> arrivals;
  CommitmentIndex index;
  for (const ledger::LedgerEvent& e : log.events()) {
    if (e.kind != EventKind::kCommitted) continue;
    auto c = ledger::CommittedPayload::Decode(e.payload);
    if (!c.ok()) return c.status();
    arrivals.push_back(c->address);
    index.Insert(c->address, c->commitment);
  }

  const ledger::ContractTerms terms = ledger.terms();
  const auto required = static_cast<size_t>(terms.required_responses);
  FilterVector filter{std::vector<uint8_t>(index.size(), 0)};
  size_t selected = 0;
  for (const Address& a : arrivals) {
    if (selected == required) break;
    auto it = by_address.find(a);
    if (it == by_address.end() || it->second->active() != a) continue;
    if (!EvaluateCriteria(*it->second, criteria)) continue;
    filter.bits[*index.IndexOf(a)] = 1;
    ++selected;
  }
  if (selected < required) {
    return absl::FailedPreconditionError(
        absl::StrCat("only ", selected, " eligible operators committed, ",
                     required, " required"));
  }

  Bytes encoded = filter.Encode();
  if (absl::Status s =
          ledger.FinalizeFilter(address_, crypto::ComputeDigest(encoded));
      !s.ok()) {
    return s;
  }
  board.Publish(ledger.contract_id(), std::move(encoded));
  return filter;
}

absl::Status SystemOperator::RevealSecret(Ledger& ledger) const {
  auto secrets = Find(ledger.contract_id());
  if (!secrets.ok()) return secrets.status();
  return ledger.RevealSecret((*secrets)->s2);
}

absl::StatusOr<std::map<Address, int64_t>> SystemOperator::PayOperators(
    Ledger& ledger, const FilterBoard& board, int64_t share_bps) const {
  const ledger::SurveyContract contract = ledger.Snapshot();
  std::optional<Bytes> published = board.Fetch(contract.contract_id);
  if (!published) return absl::NotFoundError("filter was never published");
  auto filter = FilterVector::Decode(*published);
  if (!filter.ok()) return filter.status();
  if (filter->bits.size() != contract.commitments.size()) {
    return absl::InternalError("published filter does not match commitments");
  }
  std::vector<Address> eligible;
  for (size_t i = 0; i < filter->bits.size(); ++i) {
    if (filter->selected(i)) eligible.push_back(contract.commitments.at(i).first);
  }
  std::map<Address, int64_t> split =
      ComputePayoutSplit(contract.terms.fee, eligible, share_bps);
  if (absl::Status s = ledger.Payout(address_, split, *published); !s.ok()) {
    return s;
  }
  return split;
}

// ---- drone operator --------------------------------------------------------

DroneOperator::DroneOperator(OperatorProfile profile,
                             RandomStream response_stream,
                             RandomStream nonce_stream)
    : profile_(std::move(profile)),
      response_stream_(response_stream),
      nonce_stream_(nonce_stream) {}

absl::StatusOr<Digest> DroneOperator::PrepareAndCommit(
    Ledger& ledger, std::string_view config_bytes) {
  if (ciphertext_.has_value()) {
    return absl::FailedPreconditionError("operator has already committed");
  }
  const ledger::ContractTerms terms = ledger.terms();
  if (crypto::ComputeDigest(config_bytes) != terms.config_digest) {
    return absl::DataLossError(
        "survey configuration does not match the on-ledger digest");
  }
  auto config = ParseSurveyConfig(config_bytes);
  if (!config.ok()) return config.status();
  if (!psk_.has_value()) {
    return absl::FailedPreconditionError("no survey key received");
  }
  const crypto::Secret s1 = crypto::HmacDerive(*psk_, terms.n1);
  if (s1 != terms.s1) {
    return absl::PermissionDeniedError("survey key does not match contract");
  }
  const crypto::SessionKey sk =
      crypto::DeriveSessionKey(s1, crypto::HmacDerive(*psk_, terms.n2));

  auto one_hot = ldp::EncodeOneHot(profile_.true_choice,
                                   static_cast<int64_t>(config->query.size()));
  if (!one_hot.ok()) return one_hot.status();
  ldp::ResponseVector randomized =
      ldp::RandomizeResponse(*one_hot, config->privacy, response_stream_);

  crypto::CipherNonce nonce;
  nonce_stream_.FillBytes(nonce.mutable_span());
  Ciphertext c = crypto::Encrypt(sk, crypto::EncodeResponse(randomized), nonce);
  const Digest commitment = crypto::ComputeDigest(c.Serialize());

  if (absl::Status s = ledger.CommitResponse(address(), commitment); !s.ok()) {
    return s;
  }
  randomized_ = std::move(randomized);
  ciphertext_ = std::move(c);
  return commitment;
}

absl::StatusOr<std::optional<DeliveryMessage>> DroneOperator::Deliver(
    const FilterVector& filter, const CommitmentIndex& commitments) const {
  auto index = commitments.IndexOf(address());
  if (!index.has_value()) {
    return absl::NotFoundError(absl::StrCat(
        "address ", FormatAddress(address()), " has no commitment"));
  }
  if (!ciphertext_.has_value()) {
    return absl::FailedPreconditionError("operator holds no ciphertext");
  }
  if (filter.bits.size() != commitments.size()) {
    return absl::InvalidArgumentError("filter length differs from commitments");
  }
  if (!filter.selected(*index)) return std::optional<DeliveryMessage>();
  return std::optional<DeliveryMessage>(
      DeliveryMessage{static_cast<uint64_t>(*index), *ciphertext_});
}

// ---- authority -------------------------------------------------------------

absl::StatusOr<FilterVector> Authority::LoadPublishedFilter(
    const Ledger& ledger, const FilterBoard& board) const {
  const ledger::SurveyContract contract = ledger.Snapshot();
  if (!contract.filter_digest.has_value()) {
    return absl::FailedPreconditionError("no filter recorded on the ledger");
  }
  std::optional<Bytes> published = board.Fetch(contract.contract_id);
  if (!published) return absl::NotFoundError("filter was never published");
  if (crypto::ComputeDigest(*published) != *contract.filter_digest) {
    return absl::DataLossError("published filter does not match H(F)");
  }
  auto filter = FilterVector::Decode(*published);
  if (!filter.ok()) return filter.status();
  if (filter->bits.size() != contract.commitments.size()) {
    return absl::DataLossError("filter length differs from commitments");
  }
  return filter;
}

DeliveryVerdict Authority::VerifyDelivery(const DeliveryMessage& message,
                                          const CommitmentIndex& commitments,
                                          const FilterVector& filter) {
  if (message.index >= commitments.size() ||
      message.index >= filter.bits.size()) {
    return DeliveryVerdict::kIndexOutOfRange;
  }
  const size_t i = static_cast<size_t>(message.index);
  if (crypto::ComputeDigest(message.ciphertext.Serialize()) !=
      commitments.at(i).second) {
    return DeliveryVerdict::kHashMismatch;
  }
  if (!filter.selected(i)) return DeliveryVerdict::kIneligible;
  if (!accepted_.emplace(message.index, message.ciphertext).second) {
    return DeliveryVerdict::kDuplicate;
  }
  return DeliveryVerdict::kAccepted;
}

absl::Status Authority::DepositAndAwaitReveal(Ledger& ledger) const {
  const ledger::ContractTerms terms = ledger.terms();
  if (static_cast<int64_t>(accepted_.size()) != terms.required_responses) {
    return absl::FailedPreconditionError(
        absl::StrCat("deposit refused: ", accepted_.size(), " of ",
                     terms.required_responses, " responses accepted"));
  }
  return ledger.Deposit(address_, terms.fee);
}

absl::StatusOr<AggregationOutcome> Authority::SettleAndDecrypt(
    const Ledger& ledger, const SurveyConfiguration& config) const {
  const ledger::SurveyContract contract = ledger.Snapshot();
  if ((contract.phase != ContractPhase::kRevealed &&
       contract.phase != ContractPhase::kSettled) ||
      !contract.revealed_s2.has_value()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "s2 is not on the ledger (phase ",
        ledger::PhaseName(contract.phase), "); no statistics before payment"));
  }
  const crypto::SessionKey sk =
      crypto::DeriveSessionKey(contract.terms.s1, *contract.revealed_s2);

  AggregationOutcome outcome;
  for (const auto& [index, c] : accepted_) {
    auto plaintext = crypto::Decrypt(sk, c);
    if (!plaintext.ok()) {
      return absl::DataLossError(absl::StrCat(
          "delivery at index ", index,
          " failed to decrypt: ", plaintext.status().message()));
    }
    auto rv = crypto::DecodeResponse(*plaintext);
    if (!rv.ok() || rv->size() != config.query.size()) {
      return absl::DataLossError(absl::StrCat(
          "delivery at index ", index, " is not a valid response vector"));
    }
    outcome.decrypted_vectors.push_back(*std::move(rv));
  }
  auto counts = ldp::AccumulateCounts(outcome.decrypted_vectors);
  if (!counts.ok()) return counts.status();
  auto estimate = ldp::EstimateFrequencies(*counts, config.privacy);
  if (!estimate.ok()) return estimate.status();
  outcome.counts = *std::move(counts);
  outcome.estimate = *std::move(estimate);
  return outcome;
}

}  // namespace ldpmarket::protocol
