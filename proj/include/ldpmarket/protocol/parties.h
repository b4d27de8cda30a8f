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

// The three survey parties.
//
//   SystemOperator  sets up the contract and escrowed key, screens committed
//                   operators with the dynamic filter, reveals s2 once paid
//                   and distributes the operators' share.
//   DroneOperator   verifies the configuration, randomizes and encrypts its
//                   answer, commits H(C_R) and delivers C_R if selected.
//   Authority       checks deliveries against M and F, deposits the fee and,
//                   once s2 is on the ledger, decrypts and aggregates.

#ifndef LDPMARKET_PROTOCOL_PARTIES_H_
#define LDPMARKET_PROTOCOL_PARTIES_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "absl/status/statusor.h"
#include "ldpmarket/common/random_stream.h"
#include "ldpmarket/crypto/envelope.h"
#include "ldpmarket/ldp/rappor.h"
#include "ldpmarket/ledger/ledger.h"
#include "ldpmarket/protocol/survey_config.h"

namespace ldpmarket::protocol {

using crypto::Ciphertext;
using crypto::Digest;
using crypto::PreSharedKey;
using ledger::Address;
using ledger::CommitmentIndex;
using ledger::Ledger;

inline constexpr int64_t kDefaultOperatorShareBps = 8000;  // 80% of the fee

struct OperatorProfile {
  std::string operator_id;
  // All addresses the operator owns; addresses[active_address] answers this
  // survey.
  std::vector<Address> addresses;
  size_t active_address = 0;
  std::map<std::string, std::string> attributes;
  // Simulation only.
  int64_t true_choice = 0;

  const Address& active() const { return addresses.at(active_address); }
};

// True iff every predicate's attribute is present and its value is allowed.
bool EvaluateCriteria(const OperatorProfile& profile,
                      const FilterCriteria& criteria);

// F, aligned with the sorted commitment index.
struct FilterVector {
  std::vector<uint8_t> bits;

  size_t PopCount() const;
  bool selected(size_t i) const { return bits.at(i) != 0; }
  // Same bit packing as response vectors.
  Bytes Encode() const { return crypto::EncodeBitVector(bits); }
  static absl::StatusOr<FilterVector> Decode(ByteSpan data);

  friend bool operator==(const FilterVector&, const FilterVector&) = default;
};

struct DeliveryMessage {
  uint64_t index = 0;
  Ciphertext ciphertext;
};

enum class DeliveryVerdict {
  kAccepted,
  kIndexOutOfRange,
  kHashMismatch,
  kIneligible,
  kDuplicate,
};
absl::string_view DeliveryVerdictName(DeliveryVerdict verdict);

struct AggregationOutcome {
  // Ordered by filter index.
  std::vector<ldp::ResponseVector> decrypted_vectors;
  ldp::BitCounts counts;
  ldp::FrequencyEstimate estimate;
};

// Stand-in for the pre-agreed publication location of F, keyed by contract.
class FilterBoard {
 public:
  void Publish(const Digest& contract_id, Bytes encoded_filter);
  std::optional<Bytes> Fetch(const Digest& contract_id) const;

 private:
  mutable std::mutex mu_;
  std::map<Digest, Bytes> published_;
};

// Equal floor shares of fee * share_bps / 10000 for each eligible address;
// the system operator keeps the rest.
std::map<Address, int64_t> ComputePayoutSplit(
    int64_t fee, std::span<const Address> eligible, int64_t share_bps);

class SystemOperator {
 public:
  SystemOperator(Address address, crypto::ByteSource key_source);

  const Address& address() const { return address_; }

  // Draws psk, n1 and n2, computes s1, s2 and H(s2), and creates the
  // contract. s2 never leaves this object until RevealSecret.
  absl::StatusOr<std::unique_ptr<Ledger>> SetupSurvey(
      const BuiltSurveyConfig& config, const Address& authority,
      std::string config_uri, uint64_t deadline);

  // Hands the survey psk to an operator that registered interest and records
  // the recipient.
  absl::StatusOr<PreSharedKey> RegisterInterest(const Digest& contract_id,
                                                const std::string& operator_id);
  std::vector<std::string> PskRecipients(const Digest& contract_id) const;

  // Walks commitments in ledger arrival order and sets the bit of each
  // eligible known operator until NR bits are set, then records H(F) and
  // publishes F. Fails with kFailedPrecondition, leaving the ledger in
  // Collecting, if fewer than NR eligible operators committed.
  absl::StatusOr<FilterVector> BuildAndFinalizeFilter(
      Ledger& ledger, std::span<const OperatorProfile> known_operators,
      const FilterCriteria& criteria, FilterBoard& board);

  absl::Status RevealSecret(Ledger& ledger) const;

  absl::StatusOr<std::map<Address, int64_t>> PayOperators(
      Ledger& ledger, const FilterBoard& board,
      int64_t share_bps = kDefaultOperatorShareBps) const;

 private:
  struct SurveySecrets {
    PreSharedKey psk;
    crypto::Secret s2;
    std::vector<std::string> psk_recipients;
  };

  absl::StatusOr<const SurveySecrets*> Find(const Digest& contract_id) const;

  Address address_;
  crypto::ByteSource key_source_;
  std::map<Digest, SurveySecrets> surveys_;
};

class DroneOperator {
 public:
  // `response_stream` drives the randomized response; `nonce_stream` draws
  // the AES-GCM nonce. They are separate so the randomized answer does not
  // depend on whether the response is later encrypted.
  DroneOperator(OperatorProfile profile, RandomStream response_stream,
                RandomStream nonce_stream);

  const OperatorProfile& profile() const { return profile_; }
  const Address& address() const { return profile_.active(); }

  void ReceivePsk(const PreSharedKey& psk) { psk_ = psk; }

  // Checks H(config bytes) against the on-ledger digest and refuses with
  // kDataLoss on mismatch. Otherwise randomizes the one-hot answer, encrypts
  // it under H(s1 || s2), and commits H(C_R) from the active address.
  absl::StatusOr<Digest> PrepareAndCommit(Ledger& ledger,
                                          std::string_view config_bytes);

  // A message iff this operator's bit in F is 1. kNotFound if the operator's
  // address has no commitment in M.
  absl::StatusOr<std::optional<DeliveryMessage>> Deliver(
      const FilterVector& filter, const CommitmentIndex& commitments) const;

  const std::optional<ldp::ResponseVector>& randomized_response() const {
    return randomized_;
  }
  const std::optional<Ciphertext>& ciphertext() const { return ciphertext_; }

 private:
  OperatorProfile profile_;
  RandomStream response_stream_;
  RandomStream nonce_stream_;
  std::optional<PreSharedKey> psk_;
  std::optional<ldp::ResponseVector> randomized_;
  std::optional<Ciphertext> ciphertext_;
};

class Authority {
 public:
  explicit Authority(Address address) : address_(address) {}

  const Address& address() const { return address_; }

  // Fetches F and checks it against the filter digest on the ledger.
  absl::StatusOr<FilterVector> LoadPublishedFilter(
      const Ledger& ledger, const FilterBoard& board) const;

  DeliveryVerdict VerifyDelivery(const DeliveryMessage& message,
                                 const CommitmentIndex& commitments,
                                 const FilterVector& filter);

  // Refused locally (kFailedPrecondition) until NR deliveries are accepted.
  absl::Status DepositAndAwaitReveal(Ledger& ledger) const;

  // Requires s2 on the ledger. Rebuilds sk from s1 and s2, decrypts every
  // accepted delivery and runs the frequency estimator.
  absl::StatusOr<AggregationOutcome> SettleAndDecrypt(
      const Ledger& ledger, const SurveyConfiguration& config) const;

  size_t accepted_count() const { return accepted_.size(); }
  const std::map<uint64_t, Ciphertext>& accepted() const { return accepted_; }

 private:
  Address address_;
  std::map<uint64_t, Ciphertext> accepted_;
};

}  // namespace ldpmarket::protocol

#endif  // LDPMARKET_PROTOCOL_PARTIES_H_
