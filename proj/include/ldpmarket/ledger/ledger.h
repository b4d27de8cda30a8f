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

// In-process stand-in for the survey smart contract.
//
// A Ledger hosts exactly one survey contract together with its event log and
// a table of net balances (integer currency units). Every mutation goes
// through one mutex, so commands from concurrent submitters are applied in a
// single total order and each one either fully happens (state change plus
// event) or is rejected with the state untouched.
//
// Phases:
//   Collecting -> Filtered -> Deposited -> Revealed -> Settled
//   any of Collecting/Filtered/Deposited -> Aborted (after the deadline)

#ifndef LDPMARKET_LEDGER_LEDGER_H_
#define LDPMARKET_LEDGER_LEDGER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "absl/status/statusor.h"
#include "ldpmarket/common/bytes.h"
#include "ldpmarket/crypto/envelope.h"
#include "ldpmarket/ledger/event_log.h"

namespace ldpmarket::ledger {

using crypto::Nonce;
using crypto::Secret;

struct AddressTag { static constexpr const char* kName = "address"; };
using Address = FixedBytes<20, AddressTag>;

// "0x" + 40 lowercase hex digits.
std::string FormatAddress(const Address& address);

enum class ContractPhase : uint8_t {
  kConfigured = 0,
  kCollecting = 1,
  kFiltered = 2,
  kDeposited = 3,
  kRevealed = 4,
  kSettled = 5,
  kAborted = 6,
};

absl::string_view PhaseName(ContractPhase phase);

// M: address -> H(C_R), kept sorted ascending by address bytes. The position
// of an address in this order is its filter index.
class CommitmentIndex {
 public:
  using Entry = std::pair<Address, Digest>;

  // Returns false (and leaves the index unchanged) if the address is present.
  bool Insert(const Address& address, const Digest& commitment);

  std::optional<size_t> IndexOf(const Address& address) const;
  const Entry& at(size_t i) const { return entries_[i]; }
  size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

struct ContractTerms {
  std::string config_uri;
  Digest config_digest;
  int64_t required_responses = 0;
  int64_t fee = 0;
  Nonce n1;
  Nonce n2;
  Secret s1;
  Digest h_s2;
  uint64_t deadline = 0;
  Address authority;
  Address system_operator;
};

struct SurveyContract {
  Digest contract_id;
  ContractTerms terms;
  ContractPhase phase = ContractPhase::kConfigured;
  CommitmentIndex commitments;
  std::optional<Digest> filter_digest;
  int64_t deposit_amount = 0;
  std::optional<Secret> revealed_s2;

  // Escrow account: the first 20 bytes of the contract id.
  Address escrow_address() const;
};

// Kind-specific event payloads.
struct CreatedPayload {
  ContractTerms terms;
  Bytes Encode() const;
  static absl::StatusOr<CreatedPayload> Decode(ByteSpan data);
};
struct CommittedPayload {
  Address address;
  Digest commitment;
  Bytes Encode() const;
  static absl::StatusOr<CommittedPayload> Decode(ByteSpan data);
};
struct FilterRecordedPayload {
  Address caller;
  Digest filter_digest;
  uint64_t commitment_count = 0;
  Bytes Encode() const;
  static absl::StatusOr<FilterRecordedPayload> Decode(ByteSpan data);
};
struct DepositedPayload {
  Address from;
  int64_t amount = 0;
  Bytes Encode() const;
  static absl::StatusOr<DepositedPayload> Decode(ByteSpan data);
};
struct RevealedPayload {
  Secret s2;
  Bytes Encode() const;
  static absl::StatusOr<RevealedPayload> Decode(ByteSpan data);
};
struct TransferredPayload {
  Address from;
  Address to;
  int64_t amount = 0;
  Bytes Encode() const;
  static absl::StatusOr<TransferredPayload> Decode(ByteSpan data);
};
struct PaidOutPayload {
  std::vector<std::pair<Address, int64_t>> payments;
  int64_t retained = 0;
  Bytes Encode() const;
  static absl::StatusOr<PaidOutPayload> Decode(ByteSpan data);
};
struct AbortedPayload {
  uint64_t now = 0;
  ContractPhase prior_phase = ContractPhase::kCollecting;
  Bytes Encode() const;
  static absl::StatusOr<AbortedPayload> Decode(ByteSpan data);
};

class Ledger {
 public:
  // Validates the terms, appends the Created event and opens collection.
  static absl::StatusOr<std::unique_ptr<Ledger>> CreateContract(
      ContractTerms terms);

  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  // Rejected with kAlreadyExists for a repeated address (first commitment
  // wins) and kFailedPrecondition once the filter is recorded.
  absl::Status CommitResponse(const Address& address, const Digest& commitment);

  absl::Status FinalizeFilter(const Address& caller,
                              const Digest& filter_digest);

  // Exactly the fee, from the authority, after the filter is recorded.
  absl::Status Deposit(const Address& from, int64_t amount);

  // If H(candidate) matches the stored hash, records s2 and moves the escrow
  // to the system operator in the same step. On mismatch nothing changes.
  absl::Status RevealSecret(const Secret& s2_candidate);

  // `published_filter` is the canonical F encoding; it must hash to the
  // recorded filter digest and every paid address must hold a 1 bit.
  absl::Status Payout(const Address& caller,
                      const std::map<Address, int64_t>& distribution,
                      ByteSpan published_filter);

  // Refunds an escrowed deposit to the authority.
  absl::Status Abort(uint64_t now);

  // Full copy, including the commitment index.
  SurveyContract Snapshot() const;
  ContractTerms terms() const;
  ContractPhase phase() const;
  Digest contract_id() const;
  EventLog log() const;
  size_t event_count() const;
  int64_t NetBalance(const Address& address) const;

 private:
  explicit Ledger(ContractTerms terms);

  void Transfer(const Address& from, const Address& to, int64_t amount);

  mutable std::mutex mu_;
  SurveyContract contract_;
  EventLog log_;
  std::map<Address, int64_t> balances_;
};

// Replays flows recorded in a log.
struct LedgerTotals {
  int64_t deposited = 0;
  int64_t to_system_operator = 0;
  int64_t refunded = 0;
  int64_t paid_to_operators = 0;
  int64_t retained_by_system_operator = 0;
  bool settled = false;
};
absl::StatusOr<LedgerTotals> ReplayTotals(const EventLog& log);

// Checks the ordering rules a valid log obeys: no Revealed and no transfer to
// the system operator before a Deposited event, and no Committed event after
// FilterRecorded.
absl::Status CheckSafetyOrdering(const EventLog& log);

// One line per event: sequence number, kind, decoded payload, hashes.
std::string DescribeEvent(const LedgerEvent& event);
std::string DumpEventLog(const EventLog& log);

}  // namespace ldpmarket::ledger

#endif  // LDPMARKET_LEDGER_LEDGER_H_
