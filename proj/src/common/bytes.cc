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

#include "ldpmarket/common/bytes.h"

namespace ldpmarket {

namespace {

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

absl::Status Truncated(size_t want, size_t have) {
  return absl::DataLossError(absl::StrCat("truncated input: need ", want,
                                          " bytes, ", have, " remain"));
}

}  // namespace

std::string ToHex(ByteSpan data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

absl::StatusOr<Bytes> FromHex(std::string_view hex) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  if (hex.size() % 2 != 0) {
    return absl::InvalidArgumentError("hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = HexValue(hex[2 * i]);
    int lo = HexValue(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid hex digit near offset ", 2 * i));
    }
    out[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return out;
}

void ByteWriter::PutU32(uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutU64(uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutRaw(ByteSpan data) {
  out_.insert(out_.end(), data.begin(), data.end());
}

void ByteWriter::PutLengthPrefixed(ByteSpan data) {
  PutU32(static_cast<uint32_t>(data.size()));
  PutRaw(data);
}

absl::StatusOr<uint8_t> ByteReader::ReadU8() {
  if (remaining() < 1) return Truncated(1, remaining());
  return data_[pos_++];
}

absl::StatusOr<uint32_t> ByteReader::ReadU32() {
  if (remaining() < 4) return Truncated(4, remaining());
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

absl::StatusOr<uint64_t> ByteReader::ReadU64() {
  if (remaining() < 8) return Truncated(8, remaining());
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

absl::StatusOr<ByteSpan> ByteReader::ReadRaw(size_t n) {
  if (remaining() < n) return Truncated(n, remaining());
  ByteSpan out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

absl::StatusOr<ByteSpan> ByteReader::ReadLengthPrefixed() {
  auto len = ReadU32();
  if (!len.ok()) return len.status();
  return ReadRaw(*len);
}

absl::StatusOr<std::string> ByteReader::ReadString() {
  auto raw = ReadLengthPrefixed();
  if (!raw.ok()) return raw.status();
  return std::string(raw->begin(), raw->end());
}

absl::Status ByteReader::ExpectDone() const {
  if (!done()) {
    return absl::DataLossError(
        absl::StrCat(remaining(), " trailing bytes after record"));
  }
  return absl::OkStatus();
}

}  // namespace ldpmarket
