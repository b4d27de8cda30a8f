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

#include "ldpmarket/ledger/ledger.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace ldpmarket::ledger {

namespace {

absl::Status WrongPhase(absl::string_view op, ContractPhase have,
                        ContractPhase want) {
  return absl::FailedPreconditionError(
      absl::StrCat(op, " requires phase ", PhaseName(want), ", contract is ",
                   PhaseName(have)));
}

// Decoders share this shape: read fields, then insist nothing is left over.
template <typename T>
absl::StatusOr<T> Finish(const ByteReader& r, T value) {
  if (absl::Status s = r.ExpectDone(); !s.ok()) return s;
  return value;
}

#define LDPM_ASSIGN(lhs, expr)          \
  do {                                  \
    auto _v = (expr);                   \
    if (!_v.ok()) return _v.status();   \
    lhs = *std::move(_v);               \
  } while (0)

}  // namespace

std::string FormatAddress(const Address& address) {
  return absl::StrCat("0x", address.ToHex());
}

absl::string_view PhaseName(ContractPhase phase) {
  switch (phase) {
    case ContractPhase::kConfigured: return "Configured";
    case ContractPhase::kCollecting: return "Collecting";
    case ContractPhase::kFiltered: return "Filtered";
    case ContractPhase::kDeposited: return "Deposited";
    case ContractPhase::kRevealed: return "Revealed";
    case ContractPhase::kSettled: return "Settled";
    case ContractPhase::kAborted: return "Aborted";
  }
  return "Unknown";
}

bool CommitmentIndex::Insert(const Address& address, const Digest& commitment) {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), address,
      [](const Entry& e, const Address& a) { return e.first < a; });
  if (it != entries_.end() && it->first == address) return false;
  entries_.insert(it, {address, commitment});
  return true;
}

std::optional<size_t> CommitmentIndex::IndexOf(const Address& address) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), address,
      [](const Entry& e, const Address& a) { return e.first < a; });
  if (it == entries_.end() || it->first != address) return std::nullopt;
  return static_cast<size_t>(it - entries_.begin());
}

Address SurveyContract::escrow_address() const {
  return *Address::FromSpan(contract_id.span().first(Address::kSize));
}

// ---- payloads --------------------------------------------------------------

Bytes CreatedPayload::Encode() const {
  ByteWriter w;
  w.PutString(terms.config_uri);
  w.PutRaw(terms.config_digest.span());
  w.PutU64(static_cast<uint64_t>(terms.required_responses));
  w.PutU64(static_cast<uint64_t>(terms.fee));
  w.PutRaw(terms.n1.span());
  w.PutRaw(terms.n2.span());
  w.PutRaw(terms.s1.span());
  w.PutRaw(terms.h_s2.span());
  w.PutU64(terms.deadline);
  w.PutRaw(terms.authority.span());
  w.PutRaw(terms.system_operator.span());
  return w.Take();
}

absl::StatusOr<CreatedPayload> CreatedPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  CreatedPayload p;
  LDPM_ASSIGN(p.terms.config_uri, r.ReadString());
  LDPM_ASSIGN(p.terms.config_digest, r.ReadFixed<Digest>());
  LDPM_ASSIGN(p.terms.required_responses, r.ReadU64());
  LDPM_ASSIGN(p.terms.fee, r.ReadU64());
  LDPM_ASSIGN(p.terms.n1, r.ReadFixed<Nonce>());
  LDPM_ASSIGN(p.terms.n2, r.ReadFixed<Nonce>());
  LDPM_ASSIGN(p.terms.s1, r.ReadFixed<Secret>());
  LDPM_ASSIGN(p.terms.h_s2, r.ReadFixed<Digest>());
  LDPM_ASSIGN(p.terms.deadline, r.ReadU64());
  LDPM_ASSIGN(p.terms.authority, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.terms.system_operator, r.ReadFixed<Address>());
  return Finish(r, std::move(p));
}

Bytes CommittedPayload::Encode() const {
  ByteWriter w;
  w.PutRaw(address.span());
  w.PutRaw(commitment.span());
  return w.Take();
}

absl::StatusOr<CommittedPayload> CommittedPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  CommittedPayload p;
  LDPM_ASSIGN(p.address, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.commitment, r.ReadFixed<Digest>());
  return Finish(r, std::move(p));
}

Bytes FilterRecordedPayload::Encode() const {
  ByteWriter w;
  w.PutRaw(caller.span());
  w.PutRaw(filter_digest.span());
  w.PutU64(commitment_count);
  return w.Take();
}

absl::StatusOr<FilterRecordedPayload> FilterRecordedPayload::Decode(
    ByteSpan data) {
  ByteReader r(data);
  FilterRecordedPayload p;
  LDPM_ASSIGN(p.caller, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.filter_digest, r.ReadFixed<Digest>());
  LDPM_ASSIGN(p.commitment_count, r.ReadU64());
  return Finish(r, std::move(p));
}

Bytes DepositedPayload::Encode() const {
  ByteWriter w;
  w.PutRaw(from.span());
  w.PutU64(static_cast<uint64_t>(amount));
  return w.Take();
}

absl::StatusOr<DepositedPayload> DepositedPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  DepositedPayload p;
  LDPM_ASSIGN(p.from, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.amount, r.ReadU64());
  return Finish(r, std::move(p));
}

Bytes RevealedPayload::Encode() const {
  ByteWriter w;
  w.PutRaw(s2.span());
  return w.Take();
}

absl::StatusOr<RevealedPayload> RevealedPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  RevealedPayload p;
  LDPM_ASSIGN(p.s2, r.ReadFixed<Secret>());
  return Finish(r, std::move(p));
}

Bytes TransferredPayload::Encode() const {
  ByteWriter w;
  w.PutRaw(from.span());
  w.PutRaw(to.span());
  w.PutU64(static_cast<uint64_t>(amount));
  return w.Take();
}

absl::StatusOr<TransferredPayload> TransferredPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  TransferredPayload p;
  LDPM_ASSIGN(p.from, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.to, r.ReadFixed<Address>());
  LDPM_ASSIGN(p.amount, r.ReadU64());
  return Finish(r, std::move(p));
}

Bytes PaidOutPayload::Encode() const {
  ByteWriter w;
  w.PutU32(static_cast<uint32_t>(payments.size()));
  for (const auto& [address, amount] : payments) {
    w.PutRaw(address.span());
    w.PutU64(static_cast<uint64_t>(amount));
  }
  w.PutU64(static_cast<uint64_t>(retained));
  return w.Take();
}

absl::StatusOr<PaidOutPayload> PaidOutPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  PaidOutPayload p;
  uint32_t count = 0;
  LDPM_ASSIGN(count, r.ReadU32());
  for (uint32_t i = 0; i < count; ++i) {
    std::pair<Address, int64_t> payment;
    LDPM_ASSIGN(payment.first, r.ReadFixed<Address>());
    LDPM_ASSIGN(payment.second, r.ReadU64());
    p.payments.push_back(payment);
  }
  LDPM_ASSIGN(p.retained, r.ReadU64());
  return Finish(r, std::move(p));
}

Bytes AbortedPayload::Encode() const {
  ByteWriter w;
  w.PutU64(now);
  w.PutU8(static_cast<uint8_t>(prior_phase));
  return w.Take();
}

absl::StatusOr<AbortedPayload> AbortedPayload::Decode(ByteSpan data) {
  ByteReader r(data);
  AbortedPayload p;
  LDPM_ASSIGN(p.now, r.ReadU64());
  uint8_t phase = 0;
  LDPM_ASSIGN(phase, r.ReadU8());
  if (phase > static_cast<uint8_t>(ContractPhase::kAborted)) {
    return absl::DataLossError(absl::StrCat("unknown phase ", phase));
  }
  p.prior_phase = static_cast<ContractPhase>(phase);
  return Finish(r, std::move(p));
}

// ---- ledger ----------------------------------------------------------------

Ledger::Ledger(ContractTerms terms) { contract_.terms = std::move(terms); }

absl::StatusOr<std::unique_ptr<Ledger>> Ledger::CreateContract(
    ContractTerms terms) {
  if (terms.required_responses < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "required responses must be >= 1, got ", terms.required_responses));
  }
  if (terms.fee < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("fee must be non-negative, got ", terms.fee));
  }
  if (terms.authority == terms.system_operator) {
    return absl::InvalidArgumentError(
        "authority and system operator must use distinct addresses");
  }
  std::unique_ptr<Ledger> ledger(new Ledger(terms));
  Bytes payload = CreatedPayload{std::move(terms)}.Encode();
  ledger->contract_.contract_id = crypto::ComputeDigest(payload);
  ledger->log_.Append(EventKind::kCreated, std::move(payload));
  ledger->contract_.phase = ContractPhase::kCollecting;
  return ledger;
}

void Ledger::Transfer(const Address& from, const Address& to, int64_t amount) {
  balances_[from] -= amount;
  balances_[to] += amount;
}

absl::Status Ledger::CommitResponse(const Address& address,
                                    const Digest& commitment) {
  std::lock_guard<std::mutex> lock(mu_);
  if (contract_.phase != ContractPhase::kCollecting) {
    return absl::FailedPreconditionError(
        absl::StrCat("no more responses are accepted: contract is ",
                     PhaseName(contract_.phase)));
  }
  if (!contract_.commitments.Insert(address, commitment)) {
    return absl::AlreadyExistsError(absl::StrCat(
        "address ", FormatAddress(address), " has already committed"));
  }
  log_.Append(EventKind::kCommitted,
              CommittedPayload{address, commitment}.Encode());
  return absl::OkStatus();
}

absl::Status Ledger::FinalizeFilter(const Address& caller,
                                    const Digest& filter_digest) {
  std::lock_guard<std::mutex> lock(mu_);
  if (caller != contract_.terms.system_operator) {
    return absl::PermissionDeniedError(
        "only the system operator may record the filter");
  }
  if (contract_.phase != ContractPhase::kCollecting) {
    return WrongPhase("FinalizeFilter", contract_.phase,
                      ContractPhase::kCollecting);
  }
  contract_.filter_digest = filter_digest;
  contract_.phase = ContractPhase::kFiltered;
  log_.Append(EventKind::kFilterRecorded,
              FilterRecordedPayload{caller, filter_digest,
                                    contract_.commitments.size()}
                  .Encode());
  return absl::OkStatus();
}

absl::Status Ledger::Deposit(const Address& from, int64_t amount) {
  std::lock_guard<std::mutex> lock(mu_);
  if (contract_.phase != ContractPhase::kFiltered) {
    return WrongPhase("Deposit", contract_.phase, ContractPhase::kFiltered);
  }
  if (from != contract_.terms.authority) {
    return absl::PermissionDeniedError("only the authority may deposit");
  }
  if (amount != contract_.terms.fee) {
    return absl::InvalidArgumentError(absl::StrCat(
        "deposit must equal the fee ", contract_.terms.fee, ", got ", amount));
  }
  Transfer(from, contract_.escrow_address(), amount);
  contract_.deposit_amount = amount;
  contract_.phase = ContractPhase::kDeposited;
  log_.Append(EventKind::kDeposited, DepositedPayload{from, amount}.Encode());
  return absl::OkStatus();
}

absl::Status Ledger::RevealSecret(const Secret& s2_candidate) {
  std::lock_guard<std::mutex> lock(mu_);
  if (contract_.phase != ContractPhase::kDeposited) {
    return WrongPhase("RevealSecret", contract_.phase,
                      ContractPhase::kDeposited);
  }
  if (crypto::ComputeDigest(s2_candidate.span()) != contract_.terms.h_s2) {
    return absl::PermissionDeniedError(
        "revealed secret does not match the committed hash");
  }
  const Address escrow = contract_.escrow_address();
  const Address sysop = contract_.terms.system_operator;
  const int64_t amount = contract_.deposit_amount;
  contract_.revealed_s2 = s2_candidate;
  log_.Append(EventKind::kRevealed, RevealedPayload{s2_candidate}.Encode());
  Transfer(escrow, sysop, amount);
  log_.Append(EventKind::kTransferred,
              TransferredPayload{escrow, sysop, amount}.Encode());
  contract_.phase = ContractPhase::kRevealed;
  return absl::OkStatus();
}

absl::Status Ledger::Payout(const Address& caller,
                            const std::map<Address, int64_t>& distribution,
                            ByteSpan published_filter) {
  std::lock_guard<std::mutex> lock(mu_);
  const Address sysop = contract_.terms.system_operator;
  if (caller != sysop) {
    return absl::PermissionDeniedError(
        "only the system operator may pay operators");
  }
  if (contract_.phase != ContractPhase::kRevealed) {
    return WrongPhase("Payout", contract_.phase, ContractPhase::kRevealed);
  }
  if (crypto::ComputeDigest(published_filter) != *contract_.filter_digest) {
    return absl::InvalidArgumentError(
        "published filter does not match the recorded filter digest");
  }
  auto bits = crypto::DecodeBitVector(published_filter);
  if (!bits.ok()) return bits.status();
  if (bits->size() != contract_.commitments.size()) {
    return absl::InvalidArgumentError("filter length differs from commitments");
  }

  int64_t total = 0;
  for (const auto& [address, amount] : distribution) {
    if (amount < 0) {
      return absl::InvalidArgumentError("payout amounts must be non-negative");
    }
    auto index = contract_.commitments.IndexOf(address);
    if (!index.has_value() || (*bits)[*index] == 0) {
      return absl::PermissionDeniedError(absl::StrCat(
          "address ", FormatAddress(address), " is not filter-eligible"));
    }
    total += amount;
    if (total > contract_.terms.fee) {
      return absl::InvalidArgumentError(absl::StrCat(
          "payouts exceed the fee ", contract_.terms.fee));
    }
  }

  PaidOutPayload payload;
  for (const auto& [address, amount] : distribution) {
    Transfer(sysop, address, amount);
    payload.payments.emplace_back(address, amount);
  }
  payload.retained = contract_.deposit_amount - total;
  log_.Append(EventKind::kPaidOut, payload.Encode());
  contract_.phase = ContractPhase::kSettled;
  return absl::OkStatus();
}

absl::Status Ledger::Abort(uint64_t now) {
  std::lock_guard<std::mutex> lock(mu_);
  const ContractPhase prior = contract_.phase;
  if (prior == ContractPhase::kRevealed || prior == ContractPhase::kSettled ||
      prior == ContractPhase::kAborted) {
    return absl::FailedPreconditionError(
        absl::StrCat("cannot abort a contract in phase ", PhaseName(prior)));
  }
  if (now <= contract_.terms.deadline) {
    return absl::FailedPreconditionError(
        absl::StrCat("deadline ", contract_.terms.deadline,
                     " has not passed (now ", now, ")"));
  }
  if (prior == ContractPhase::kDeposited) {
    const Address escrow = contract_.escrow_address();
    Transfer(escrow, contract_.terms.authority, contract_.deposit_amount);
    log_.Append(EventKind::kTransferred,
                TransferredPayload{escrow, contract_.terms.authority,
                                   contract_.deposit_amount}
                    .Encode());
  }
  contract_.phase = ContractPhase::kAborted;
  log_.Append(EventKind::kAborted, AbortedPayload{now, prior}.Encode());
  return absl::OkStatus();
}

SurveyContract Ledger::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return contract_;
}

ContractTerms Ledger::terms() const {
  std::lock_guard<std::mutex> lock(mu_);
  return contract_.terms;
}

ContractPhase Ledger::phase() const {
  std::lock_guard<std::mutex> lock(mu_);
  return contract_.phase;
}

Digest Ledger::contract_id() const {
  std::lock_guard<std::mutex> lock(mu_);
  return contract_.contract_id;
}

EventLog Ledger::log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

size_t Ledger::event_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_.size();
}

int64_t Ledger::NetBalance(const Address& address) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = balances_.find(address);
  return it == balances_.end() ? 0 : it->second;
}

// ---- audits ----------------------------------------------------------------

absl::StatusOr<LedgerTotals> ReplayTotals(const EventLog& log) {
  if (log.empty() || log.events().front().kind != EventKind::kCreated) {
    return absl::InvalidArgumentError("log does not start with Created");
  }
  auto created = CreatedPayload::Decode(log.events().front().payload);
  if (!created.ok()) return created.status();
  const Address sysop = created->terms.system_operator;
  const Address authority = created->terms.authority;

  LedgerTotals totals;
  for (const LedgerEvent& e : log.events()) {
    switch (e.kind) {
      case EventKind::kDeposited: {
        auto p = DepositedPayload::Decode(e.payload);
        if (!p.ok()) return p.status();
        totals.deposited += p->amount;
        break;
      }
      case EventKind::kTransferred: {
        auto p = TransferredPayload::Decode(e.payload);
        if (!p.ok()) return p.status();
        if (p->to == sysop) totals.to_system_operator += p->amount;
        if (p->to == authority) totals.refunded += p->amount;
        break;
      }
      case EventKind::kPaidOut: {
        auto p = PaidOutPayload::Decode(e.payload);
        if (!p.ok()) return p.status();
        for (const auto& payment : p->payments) {
          totals.paid_to_operators += payment.second;
        }
        totals.retained_by_system_operator += p->retained;
        totals.settled = true;
        break;
      }
      default:
        break;
    }
  }
  return totals;
}

absl::Status CheckSafetyOrdering(const EventLog& log) {
  if (log.empty() || log.events().front().kind != EventKind::kCreated) {
    return absl::InvalidArgumentError("log does not start with Created");
  }
  auto created = CreatedPayload::Decode(log.events().front().payload);
  if (!created.ok()) return created.status();
  const Address sysop = created->terms.system_operator;

  bool deposited = false;
  bool filtered = false;
  for (const LedgerEvent& e : log.events()) {
    switch (e.kind) {
      case EventKind::kDeposited:
        deposited = true;
        break;
      case EventKind::kFilterRecorded:
        filtered = true;
        break;
      case EventKind::kCommitted:
        if (filtered) {
          return absl::InternalError(absl::StrCat(
              "event ", e.sequence_no, ": commitment after filter"));
        }
        break;
      case EventKind::kRevealed:
        if (!deposited) {
          return absl::InternalError(absl::StrCat(
              "event ", e.sequence_no, ": reveal before deposit"));
        }
        break;
      case EventKind::kTransferred: {
        auto p = TransferredPayload::Decode(e.payload);
        if (!p.ok()) return p.status();
        if (p->to == sysop && !deposited) {
          return absl::InternalError(absl::StrCat(
              "event ", e.sequence_no,
              ": transfer to system operator before deposit"));
        }
        break;
      }
      default:
        break;
    }
  }
  return absl::OkStatus();
}

namespace {

std::string DescribePayload(const LedgerEvent& event) {
  auto bad = [](const absl::Status& s) {
    return absl::StrCat("<undecodable: ", s.message(), ">");
  };
  switch (event.kind) {
    case EventKind::kCreated: {
      auto p = CreatedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      const ContractTerms& t = p->terms;
      return absl::StrCat(
          "uri=", t.config_uri, " config=", t.config_digest.ToHex(),
          " nr=", t.required_responses, " fee=", t.fee, " n1=", t.n1.ToHex(),
          " n2=", t.n2.ToHex(), " s1=", t.s1.ToHex(), " h_s2=", t.h_s2.ToHex(),
          " deadline=", t.deadline, " authority=", FormatAddress(t.authority),
          " sysop=", FormatAddress(t.system_operator));
    }
    case EventKind::kCommitted: {
      auto p = CommittedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("address=", FormatAddress(p->address),
                          " commitment=", p->commitment.ToHex());
    }
    case EventKind::kFilterRecorded: {
      auto p = FilterRecordedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("filter=", p->filter_digest.ToHex(),
                          " commitments=", p->commitment_count);
    }
    case EventKind::kDeposited: {
      auto p = DepositedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("from=", FormatAddress(p->from),
                          " amount=", p->amount);
    }
    case EventKind::kRevealed: {
      auto p = RevealedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("s2=", p->s2.ToHex());
    }
    case EventKind::kTransferred: {
      auto p = TransferredPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("from=", FormatAddress(p->from),
                          " to=", FormatAddress(p->to), " amount=", p->amount);
    }
    case EventKind::kPaidOut: {
      auto p = PaidOutPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      std::vector<std::string> parts;
      for (const auto& [address, amount] : p->payments) {
        parts.push_back(absl::StrCat(FormatAddress(address), ":", amount));
      }
      return absl::StrCat("payments=[", absl::StrJoin(parts, ","),
                          "] retained=", p->retained);
    }
    case EventKind::kAborted: {
      auto p = AbortedPayload::Decode(event.payload);
      if (!p.ok()) return bad(p.status());
      return absl::StrCat("now=", p->now,
                          " prior_phase=", PhaseName(p->prior_phase));
    }
  }
  return "";
}

}  // namespace

std::string DescribeEvent(const LedgerEvent& event) {
  return absl::StrCat(event.sequence_no, " ", EventKindName(event.kind), " ",
                      DescribePayload(event),
                      " prev=", event.prev_hash.ToHex(),
                      " hash=", event.event_hash.ToHex());
}

std::string DumpEventLog(const EventLog& log) {
  std::string out;
  for (const LedgerEvent& e : log.events()) {
    absl::StrAppend(&out, DescribeEvent(e), "\n");
  }
  return out;
}

}  // namespace ldpmarket::ledger
