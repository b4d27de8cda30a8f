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

#include <thread>

#include "gtest/gtest.h"

namespace ldpmarket::ledger {
namespace {

Address Addr(uint8_t first, uint8_t last = 0) {
  std::array<uint8_t, 20> raw{};
  raw[0] = first;
  raw[19] = last;
  return Address(raw);
}

Digest DigestOf(std::string_view s) { return crypto::ComputeDigest(s); }

const Address kAuthority = Addr(0xa0);
const Address kSysop = Addr(0xb0);

struct Survey {
  Secret s2;
  std::unique_ptr<Ledger> ledger;
};

Survey NewSurvey(uint64_t seed, int64_t nr = 2, int64_t fee = 100,
                 uint64_t deadline = 50) {
  RandomStream rng(seed);
  const crypto::ByteSource src = crypto::SeededSource(rng);
  ContractTerms terms;
  terms.config_uri = "artifact://test";
  terms.config_digest = DigestOf("config");
  terms.required_responses = nr;
  terms.fee = fee;
  terms.n1 = crypto::DrawFixed<Nonce>(src);
  terms.n2 = crypto::DrawFixed<Nonce>(src);
  terms.s1 = crypto::DrawFixed<Secret>(src);
  Survey s;
  s.s2 = crypto::DrawFixed<Secret>(src);
  terms.h_s2 = crypto::ComputeDigest(s.s2.span());
  terms.deadline = deadline;
  terms.authority = kAuthority;
  terms.system_operator = kSysop;
  s.ledger = *Ledger::CreateContract(terms);
  return s;
}

// Commits `count` addresses 0x01.., finalizes a filter selecting the first
// `selected` sorted positions and returns the published filter bytes.
Bytes CommitAndFilter(Ledger& ledger, int count, int selected) {
  for (int i = 0; i < count; ++i) {
    EXPECT_TRUE(ledger.CommitResponse(Addr(static_cast<uint8_t>(i + 1)),
                                      DigestOf(std::to_string(i)))
                    .ok());
  }
  std::vector<uint8_t> bits(count, 0);
  for (int i = 0; i < selected; ++i) bits[i] = 1;
  Bytes encoded = crypto::EncodeBitVector(bits);
  EXPECT_TRUE(ledger.FinalizeFilter(kSysop, crypto::ComputeDigest(encoded)).ok());
  return encoded;
}

TEST(CreateContractTest, Validation) {
  ContractTerms terms = NewSurvey(1).ledger->terms();
  terms.required_responses = 0;
  EXPECT_FALSE(Ledger::CreateContract(terms).ok());
  terms.required_responses = 1;
  terms.fee = -1;
  EXPECT_FALSE(Ledger::CreateContract(terms).ok());
  terms.fee = 1;
  terms.system_operator = terms.authority;
  EXPECT_FALSE(Ledger::CreateContract(terms).ok());
}

TEST(CreateContractTest, FreshContract) {
  Survey s = NewSurvey(1);
  EXPECT_EQ(s.ledger->event_count(), 1u);
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kCollecting);
  EXPECT_EQ(s.ledger->log().events()[0].kind, EventKind::kCreated);
  EXPECT_EQ(s.ledger->Snapshot().terms.s1, s.ledger->terms().s1);
  EXPECT_EQ(s.ledger->terms().h_s2, crypto::ComputeDigest(s.s2.span()));
}

TEST(CreateContractTest, IdCoversEveryField) {
  ContractTerms terms = NewSurvey(1).ledger->terms();
  const Digest a = (*Ledger::CreateContract(terms))->contract_id();
  EXPECT_EQ(a, (*Ledger::CreateContract(terms))->contract_id());
  std::array<uint8_t, 16> n1 = terms.n1.array();
  n1[0] ^= 1;
  terms.n1 = Nonce(n1);
  EXPECT_NE(a, (*Ledger::CreateContract(terms))->contract_id());
}

TEST(CommitTest, SingleCommitPerAddress) {
  Survey s = NewSurvey(2);
  EXPECT_TRUE(s.ledger->CommitResponse(Addr(1), DigestOf("a")).ok());
  auto again = s.ledger->CommitResponse(Addr(1), DigestOf("b"));
  EXPECT_TRUE(absl::IsAlreadyExists(again));
  EXPECT_EQ(s.ledger->event_count(), 2u);
}

TEST(CommitTest, IndexIsSortedByAddress) {
  Survey s = NewSurvey(3);
  ASSERT_TRUE(s.ledger->CommitResponse(Addr(0x0a), DigestOf("a")).ok());
  ASSERT_TRUE(s.ledger->CommitResponse(Addr(0x03), DigestOf("b")).ok());
  ASSERT_TRUE(s.ledger->CommitResponse(Addr(0x07), DigestOf("c")).ok());
  const CommitmentIndex m = s.ledger->Snapshot().commitments;
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.at(0).first, Addr(0x03));
  EXPECT_EQ(m.at(1).first, Addr(0x07));
  EXPECT_EQ(m.at(2).first, Addr(0x0a));
  EXPECT_EQ(*m.IndexOf(Addr(0x0a)), 2u);
  EXPECT_FALSE(m.IndexOf(Addr(0x04)).has_value());
}

TEST(FinalizeFilterTest, OnceOnlyThenClosed) {
  Survey s = NewSurvey(4);
  ASSERT_TRUE(s.ledger->CommitResponse(Addr(1), DigestOf("a")).ok());
  EXPECT_TRUE(absl::IsPermissionDenied(
      s.ledger->FinalizeFilter(kAuthority, DigestOf("F"))));
  EXPECT_TRUE(s.ledger->FinalizeFilter(kSysop, DigestOf("F")).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kFiltered);
  EXPECT_EQ(*s.ledger->Snapshot().filter_digest, DigestOf("F"));
  EXPECT_FALSE(s.ledger->FinalizeFilter(kSysop, DigestOf("F")).ok());

  const absl::Status late = s.ledger->CommitResponse(Addr(2), DigestOf("b"));
  EXPECT_TRUE(absl::IsFailedPrecondition(late));
  EXPECT_NE(late.message().find("no more responses are accepted"),
            absl::string_view::npos);
  EXPECT_EQ(s.ledger->Snapshot().commitments.size(), 1u);
}

TEST(DepositTest, ExactFeeAfterFilter) {
  Survey s = NewSurvey(5);
  EXPECT_TRUE(absl::IsFailedPrecondition(s.ledger->Deposit(kAuthority, 100)));
  CommitAndFilter(*s.ledger, 3, 2);
  EXPECT_FALSE(s.ledger->Deposit(kAuthority, 99).ok());
  EXPECT_FALSE(s.ledger->Deposit(kAuthority, 101).ok());
  EXPECT_FALSE(s.ledger->Deposit(kSysop, 100).ok());
  EXPECT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kDeposited);
  EXPECT_EQ(s.ledger->Snapshot().deposit_amount, 100);
  EXPECT_EQ(s.ledger->NetBalance(s.ledger->Snapshot().escrow_address()), 100);
  EXPECT_EQ(s.ledger->NetBalance(kAuthority), -100);
  EXPECT_FALSE(s.ledger->Deposit(kAuthority, 100).ok());
}

TEST(RevealTest, BeforeDepositRejected) {
  Survey s = NewSurvey(6);
  CommitAndFilter(*s.ledger, 3, 2);
  EXPECT_TRUE(absl::IsFailedPrecondition(s.ledger->RevealSecret(s.s2)));
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kFiltered);
}

TEST(RevealTest, WrongSecretLeavesDeposit) {
  Survey s = NewSurvey(7);
  CommitAndFilter(*s.ledger, 3, 2);
  ASSERT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  const size_t events = s.ledger->event_count();
  std::array<uint8_t, 32> bad = s.s2.array();
  bad[31] ^= 0x01;
  EXPECT_TRUE(absl::IsPermissionDenied(s.ledger->RevealSecret(Secret(bad))));
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kDeposited);
  EXPECT_EQ(s.ledger->event_count(), events);
  EXPECT_EQ(s.ledger->NetBalance(s.ledger->Snapshot().escrow_address()), 100);
  EXPECT_EQ(s.ledger->NetBalance(kSysop), 0);
  EXPECT_FALSE(s.ledger->Snapshot().revealed_s2.has_value());
}

TEST(RevealTest, CorrectSecretTransfersAtomically) {
  Survey s = NewSurvey(8);
  CommitAndFilter(*s.ledger, 3, 2);
  ASSERT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  ASSERT_TRUE(s.ledger->RevealSecret(s.s2).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kRevealed);
  const EventLog log = s.ledger->log();
  const auto& events = log.events();
  ASSERT_GE(events.size(), 2u);
  EXPECT_EQ(events[events.size() - 2].kind, EventKind::kRevealed);
  EXPECT_EQ(events.back().kind, EventKind::kTransferred);
  auto t = TransferredPayload::Decode(events.back().payload);
  EXPECT_EQ(t->to, kSysop);
  EXPECT_EQ(t->amount, 100);
  EXPECT_EQ(*s.ledger->Snapshot().revealed_s2, s.s2);
  EXPECT_EQ(s.ledger->NetBalance(kSysop), 100);
  EXPECT_EQ(s.ledger->NetBalance(s.ledger->Snapshot().escrow_address()), 0);
  EXPECT_FALSE(s.ledger->RevealSecret(s.s2).ok());
}

TEST(PayoutTest, SplitForTwoResponses) {
  Survey s = NewSurvey(9);
  const Bytes filter = CommitAndFilter(*s.ledger, 3, 2);
  ASSERT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  ASSERT_TRUE(s.ledger->RevealSecret(s.s2).ok());

  EXPECT_TRUE(absl::IsPermissionDenied(
      s.ledger->Payout(kSysop, {{Addr(3), 10}}, filter)));
  EXPECT_FALSE(s.ledger->Payout(kSysop, {{Addr(1), 60}, {Addr(2), 41}}, filter).ok());
  EXPECT_FALSE(s.ledger->Payout(kAuthority, {{Addr(1), 40}}, filter).ok());
  EXPECT_FALSE(s.ledger->Payout(kSysop, {{Addr(1), 40}}, AsBytes("forged")).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kRevealed);

  ASSERT_TRUE(s.ledger->Payout(kSysop, {{Addr(1), 40}, {Addr(2), 40}}, filter).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kSettled);
  EXPECT_EQ(s.ledger->NetBalance(Addr(1)), 40);
  EXPECT_EQ(s.ledger->NetBalance(Addr(2)), 40);
  EXPECT_EQ(s.ledger->NetBalance(kSysop), 20);

  auto totals = ReplayTotals(s.ledger->log());
  ASSERT_TRUE(totals.ok());
  EXPECT_TRUE(totals->settled);
  EXPECT_EQ(totals->deposited, 100);
  EXPECT_EQ(totals->to_system_operator, 100);
  EXPECT_EQ(totals->paid_to_operators, 80);
  EXPECT_EQ(totals->retained_by_system_operator, 20);
  EXPECT_EQ(totals->paid_to_operators + totals->retained_by_system_operator,
            s.ledger->terms().fee);
  EXPECT_TRUE(CheckSafetyOrdering(s.ledger->log()).ok());
}

TEST(AbortTest, CollectingTimeout) {
  Survey s = NewSurvey(10);
  ASSERT_TRUE(s.ledger->CommitResponse(Addr(1), DigestOf("a")).ok());
  EXPECT_FALSE(s.ledger->Abort(50).ok());
  ASSERT_TRUE(s.ledger->Abort(51).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kAborted);
  const EventLog aborted = s.ledger->log();
  for (const LedgerEvent& e : aborted.events()) {
    EXPECT_NE(e.kind, EventKind::kTransferred);
  }
  EXPECT_EQ(s.ledger->log().events().back().kind, EventKind::kAborted);
  EXPECT_FALSE(s.ledger->CommitResponse(Addr(2), DigestOf("b")).ok());
}

TEST(AbortTest, DepositedTimeoutRefunds) {
  Survey s = NewSurvey(11);
  CommitAndFilter(*s.ledger, 3, 2);
  ASSERT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  ASSERT_TRUE(s.ledger->Abort(1000).ok());
  EXPECT_EQ(s.ledger->NetBalance(kAuthority), 0);
  EXPECT_EQ(s.ledger->NetBalance(kSysop), 0);
  auto totals = ReplayTotals(s.ledger->log());
  EXPECT_EQ(totals->refunded, 100);
  EXPECT_EQ(totals->deposited, totals->to_system_operator + totals->refunded);
  EXPECT_FALSE(s.ledger->RevealSecret(s.s2).ok());
}

TEST(AbortTest, SettledCannotAbort) {
  Survey s = NewSurvey(12);
  const Bytes filter = CommitAndFilter(*s.ledger, 2, 2);
  ASSERT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  ASSERT_TRUE(s.ledger->RevealSecret(s.s2).ok());
  ASSERT_TRUE(s.ledger->Payout(kSysop, {{Addr(1), 40}, {Addr(2), 40}}, filter).ok());
  EXPECT_FALSE(s.ledger->Abort(1000).ok());
  EXPECT_EQ(s.ledger->phase(), ContractPhase::kSettled);
}

EventLog SettledLog(uint64_t seed) {
  Survey s = NewSurvey(seed);
  const Bytes filter = CommitAndFilter(*s.ledger, 3, 2);
  EXPECT_TRUE(s.ledger->Deposit(kAuthority, 100).ok());
  EXPECT_TRUE(s.ledger->RevealSecret(s.s2).ok());
  EXPECT_TRUE(s.ledger->Payout(kSysop, {{Addr(1), 40}, {Addr(2), 40}}, filter).ok());
  return s.ledger->log();
}

TEST(EventChainTest, UntouchedVerifies) {
  const EventLog log = SettledLog(13);
  EXPECT_EQ(log.size(), 9u);
  const ChainVerdict v = VerifyEventChain(log);
  EXPECT_TRUE(v.ok);
  EXPECT_FALSE(v.first_bad_index.has_value());
  EXPECT_EQ(log.events()[0].prev_hash, Digest());
  for (size_t i = 1; i < log.size(); ++i) {
    EXPECT_EQ(log.events()[i].prev_hash, log.events()[i - 1].event_hash);
    EXPECT_EQ(log.events()[i].sequence_no, i);
  }
}

TEST(EventChainTest, PayloadMutationFoundAtItsIndex) {
  const EventLog log = SettledLog(14);
  RandomStream rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<LedgerEvent> events = log.events();
    const size_t i = rng.UniformInt(events.size());
    Bytes& payload = events[i].payload;
    payload[rng.UniformInt(payload.size())] ^=
        static_cast<uint8_t>(1 + rng.UniformInt(255));
    const ChainVerdict v = VerifyEventChain(EventLog::FromEvents(events));
    ASSERT_FALSE(v.ok);
    EXPECT_EQ(*v.first_bad_index, i);
  }
}

TEST(EventChainTest, SwapDetected) {
  std::vector<LedgerEvent> events = SettledLog(15).events();
  std::swap(events[2], events[3]);
  const ChainVerdict v = VerifyEventChain(EventLog::FromEvents(events));
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(*v.first_bad_index, 2u);
}

TEST(EventChainTest, ExportImportRoundTrip) {
  const EventLog log = SettledLog(16);
  const Bytes exported = log.Export();
  EXPECT_EQ(std::string(exported.begin(), exported.begin() + 8), "LDPLOG01");
  auto imported = ImportEventLog(exported);
  ASSERT_TRUE(imported.ok());
  EXPECT_EQ(imported->events(), log.events());
  EXPECT_EQ(imported->head_hash(), log.head_hash());
}

TEST(EventChainTest, ImportNamesBadRecord) {
  Bytes exported = SettledLog(17).Export();
  exported.resize(exported.size() - 5);
  size_t bad = 0;
  auto imported = ImportEventLog(exported, &bad);
  ASSERT_FALSE(imported.ok());
  EXPECT_EQ(bad, 8u);
  EXPECT_NE(imported.status().message().find("record 8"), absl::string_view::npos);
}

TEST(EventChainTest, SerializedMutationsDetected) {
  const Bytes exported = SettledLog(18).Export();
  RandomStream rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    Bytes mutated = exported;
    mutated[rng.UniformInt(mutated.size())] ^=
        static_cast<uint8_t>(1 + rng.UniformInt(255));
    auto imported = ImportEventLog(mutated);
    ASSERT_TRUE(!imported.ok() || !VerifyEventChain(*imported).ok) << trial;
  }
}

TEST(SafetyOrderingTest, TransferBeforeDepositFlagged) {
  const EventLog good = SettledLog(19);
  EventLog forged;
  forged.Append(EventKind::kCreated, good.events()[0].payload);
  forged.Append(EventKind::kTransferred,
                TransferredPayload{Addr(0xee), kSysop, 100}.Encode());
  EXPECT_TRUE(VerifyEventChain(forged).ok);
  EXPECT_FALSE(CheckSafetyOrdering(forged).ok());

  EventLog late_commit;
  late_commit.Append(EventKind::kCreated, good.events()[0].payload);
  late_commit.Append(EventKind::kFilterRecorded,
                     FilterRecordedPayload{kSysop, DigestOf("F"), 0}.Encode());
  late_commit.Append(EventKind::kCommitted,
                     CommittedPayload{Addr(1), DigestOf("a")}.Encode());
  EXPECT_FALSE(CheckSafetyOrdering(late_commit).ok());
}

TEST(PayloadTest, RoundTrips) {
  const ContractTerms terms = NewSurvey(20).ledger->terms();
  auto created = CreatedPayload::Decode(CreatedPayload{terms}.Encode());
  ASSERT_TRUE(created.ok());
  EXPECT_EQ(created->terms.config_uri, terms.config_uri);
  EXPECT_EQ(created->terms.h_s2, terms.h_s2);
  EXPECT_EQ(created->terms.authority, terms.authority);

  PaidOutPayload paid{{{Addr(1), 5}, {Addr(2), 6}}, 7};
  auto decoded = PaidOutPayload::Decode(paid.Encode());
  EXPECT_EQ(decoded->payments, paid.payments);
  EXPECT_EQ(decoded->retained, 7);

  Bytes trailing = CommittedPayload{Addr(1), DigestOf("a")}.Encode();
  trailing.push_back(0);
  EXPECT_FALSE(CommittedPayload::Decode(trailing).ok());
}

TEST(DumpTest, OneLinePerEvent) {
  const EventLog log = SettledLog(21);
  const std::string dump = DumpEventLog(log);
  EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'),
            static_cast<long>(log.size()));
  EXPECT_NE(dump.find("0 Created"), std::string::npos);
  EXPECT_NE(dump.find("PaidOut"), std::string::npos);
  EXPECT_NE(dump.find(log.head_hash().ToHex()), std::string::npos);
}

TEST(ConcurrencyTest, ParallelCommitsSerialize) {
  Survey s = NewSurvey(22);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        EXPECT_TRUE(s.ledger
                        ->CommitResponse(Addr(static_cast<uint8_t>(t + 1),
                                              static_cast<uint8_t>(i)),
                                         DigestOf("x"))
                        .ok());
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(s.ledger->Snapshot().commitments.size(), 400u);
  EXPECT_TRUE(VerifyEventChain(s.ledger->log()).ok);
}

}  // namespace
}  // namespace ldpmarket::ledger
