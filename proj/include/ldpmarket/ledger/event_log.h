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

// Append-only, hash-chained record of every ledger mutation.
//
// Canonical event serialization (big-endian, hashed to produce event_hash):
//
//   u64 sequence_no | u8 kind | u32 payload_len | payload | 32B prev_hash
//
// The export file is the 8-byte magic "LDPLOG01" followed by one record per
// event: u32 record_len | canonical serialization | 32B event_hash.

#ifndef LDPMARKET_LEDGER_EVENT_LOG_H_
#define LDPMARKET_LEDGER_EVENT_LOG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ldpmarket/common/bytes.h"
#include "ldpmarket/crypto/envelope.h"

namespace ldpmarket::ledger {

using crypto::Digest;

enum class EventKind : uint8_t {
  kCreated = 1,
  kCommitted = 2,
  kFilterRecorded = 3,
  kDeposited = 4,
  kRevealed = 5,
  kTransferred = 6,
  kPaidOut = 7,
  kAborted = 8,
};

absl::string_view EventKindName(EventKind kind);
bool IsValidEventKind(uint8_t raw);

struct LedgerEvent {
  uint64_t sequence_no = 0;
  EventKind kind = EventKind::kCreated;
  Bytes payload;
  Digest prev_hash;
  Digest event_hash;

  // Everything except event_hash.
  Bytes CanonicalBytes() const;
  Digest ComputeHash() const { return crypto::ComputeDigest(CanonicalBytes()); }

  friend bool operator==(const LedgerEvent&, const LedgerEvent&) = default;
};

struct ChainVerdict {
  bool ok = true;
  // Index of the first event whose hash or link does not verify.
  std::optional<size_t> first_bad_index;
};

class EventLog {
 public:
  EventLog() = default;
  // Wraps events as-is, without verifying them.
  static EventLog FromEvents(std::vector<LedgerEvent> events);

  // Links to the current head and seals the new event.
  const LedgerEvent& Append(EventKind kind, Bytes payload);

  const std::vector<LedgerEvent>& events() const { return events_; }
  size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  Digest head_hash() const;

  Bytes Export() const;

 private:
  std::vector<LedgerEvent> events_;
};

// Parses an exported log. On a structural error the index of the offending
// record is written to *bad_record when given.
absl::StatusOr<EventLog> ImportEventLog(ByteSpan data,
                                        size_t* bad_record = nullptr);

ChainVerdict VerifyEventChain(const EventLog& log);

}  // namespace ldpmarket::ledger

#endif  // LDPMARKET_LEDGER_EVENT_LOG_H_
