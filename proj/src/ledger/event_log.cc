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

#include "ldpmarket/ledger/event_log.h"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ldpmarket::ledger {

namespace {

constexpr std::string_view kLogMagic = "LDPLOG01";

}  // namespace

absl::string_view EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kCreated: return "Created";
    case EventKind::kCommitted: return "Committed";
    case EventKind::kFilterRecorded: return "FilterRecorded";
    case EventKind::kDeposited: return "Deposited";
    case EventKind::kRevealed: return "Revealed";
    case EventKind::kTransferred: return "Transferred";
    case EventKind::kPaidOut: return "PaidOut";
    case EventKind::kAborted: return "Aborted";
  }
  return "Unknown";
}

bool IsValidEventKind(uint8_t raw) {
  return raw >= static_cast<uint8_t>(EventKind::kCreated) &&
         raw <= static_cast<uint8_t>(EventKind::kAborted);
}

Bytes LedgerEvent::CanonicalBytes() const {
  ByteWriter w;
  w.PutU64(sequence_no);
  w.PutU8(static_cast<uint8_t>(kind));
  w.PutLengthPrefixed(payload);
  w.PutRaw(prev_hash.span());
  return w.Take();
}

EventLog EventLog::FromEvents(std::vector<LedgerEvent> events) {
  EventLog log;
  log.events_ = std::move(events);
  return log;
}

Digest EventLog::head_hash() const {
  return events_.empty() ? Digest() : events_.back().event_hash;
}

const LedgerEvent& EventLog::Append(EventKind kind, Bytes payload) {
  LedgerEvent event;
  event.sequence_no = events_.size();
  event.kind = kind;
  event.payload = std::move(payload);
  event.prev_hash = head_hash();
  event.event_hash = event.ComputeHash();
  events_.push_back(std::move(event));
  return events_.back();
}

Bytes EventLog::Export() const {
  ByteWriter w;
  w.PutRaw(AsBytes(kLogMagic));
  for (const LedgerEvent& event : events_) {
    Bytes record = event.CanonicalBytes();
    record.insert(record.end(), event.event_hash.span().begin(),
                  event.event_hash.span().end());
    w.PutLengthPrefixed(record);
  }
  return w.Take();
}

absl::StatusOr<EventLog> ImportEventLog(ByteSpan data, size_t* bad_record) {
  auto fail = [bad_record](size_t index, const absl::Status& cause) {
    if (bad_record != nullptr) *bad_record = index;
    return absl::DataLossError(
        absl::StrCat("malformed record ", index, ": ", cause.message()));
  };

  ByteReader reader(data);
  auto magic = reader.ReadRaw(kLogMagic.size());
  if (!magic.ok() ||
      std::string_view(reinterpret_cast<const char*>(magic->data()),
                       magic->size()) != kLogMagic) {
    return fail(0, absl::DataLossError("missing LDPLOG01 header"));
  }

  std::vector<LedgerEvent> events;
  while (!reader.done()) {
    const size_t index = events.size();
    auto record = reader.ReadLengthPrefixed();
    if (!record.ok()) return fail(index, record.status());

    ByteReader r(*record);
    LedgerEvent event;
    auto seq = r.ReadU64();
    if (!seq.ok()) return fail(index, seq.status());
    auto kind = r.ReadU8();
    if (!kind.ok()) return fail(index, kind.status());
    if (!IsValidEventKind(*kind)) {
      return fail(index, absl::DataLossError(
                             absl::StrCat("unknown event kind ", *kind)));
    }
    auto payload = r.ReadLengthPrefixed();
    if (!payload.ok()) return fail(index, payload.status());
    auto prev = r.ReadFixed<Digest>();
    if (!prev.ok()) return fail(index, prev.status());
    auto hash = r.ReadFixed<Digest>();
    if (!hash.ok()) return fail(index, hash.status());
    if (absl::Status s = r.ExpectDone(); !s.ok()) return fail(index, s);

    event.sequence_no = *seq;
    event.kind = static_cast<EventKind>(*kind);
    event.payload.assign(payload->begin(), payload->end());
    event.prev_hash = *prev;
    event.event_hash = *hash;
    events.push_back(std::move(event));
  }
  return EventLog::FromEvents(std::move(events));
}

ChainVerdict VerifyEventChain(const EventLog& log) {
  Digest expected_prev;
  const auto& events = log.events();
  for (size_t i = 0; i < events.size(); ++i) {
    const LedgerEvent& e = events[i];
    if (e.sequence_no != i || e.prev_hash != expected_prev ||
        e.ComputeHash() != e.event_hash) {
      return {false, i};
    }
    expected_prev = e.event_hash;
  }
  return {true, std::nullopt};
}

}  // namespace ldpmarket::ledger
