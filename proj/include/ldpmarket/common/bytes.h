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

#ifndef LDPMARKET_COMMON_BYTES_H_
#define LDPMARKET_COMMON_BYTES_H_

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"

namespace ldpmarket {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

// Lowercase hex, no prefix.
std::string ToHex(ByteSpan data);
absl::StatusOr<Bytes> FromHex(std::string_view hex);

inline ByteSpan AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

// Fixed-width byte string. `Tag` makes each domain quantity (key, nonce,
// digest, ...) its own type so they cannot be swapped by accident.
template <size_t N, typename Tag>
class FixedBytes {
 public:
  static constexpr size_t kSize = N;

  FixedBytes() : bytes_{} {}
  explicit FixedBytes(const std::array<uint8_t, N>& bytes) : bytes_(bytes) {}

  static absl::StatusOr<FixedBytes> FromSpan(ByteSpan data) {
    if (data.size() != N) {
      return absl::InvalidArgumentError(absl::StrCat(
          Tag::kName, " must be exactly ", N, " bytes, got ", data.size()));
    }
    FixedBytes out;
    std::copy(data.begin(), data.end(), out.bytes_.begin());
    return out;
  }

  static absl::StatusOr<FixedBytes> FromHex(std::string_view hex) {
    auto raw = ::ldpmarket::FromHex(hex);
    if (!raw.ok()) return raw.status();
    return FromSpan(*raw);
  }

  ByteSpan span() const { return bytes_; }
  std::span<uint8_t> mutable_span() { return bytes_; }
  const std::array<uint8_t, N>& array() const { return bytes_; }
  uint8_t operator[](size_t i) const { return bytes_[i]; }
  std::string ToHex() const { return ::ldpmarket::ToHex(bytes_); }

  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;

 private:
  std::array<uint8_t, N> bytes_;
};

// Big-endian writer for the canonical encodings used by commitments and the
// event log.
class ByteWriter {
 public:
  void PutU8(uint8_t v) { out_.push_back(v); }
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutRaw(ByteSpan data);
  // u32 length followed by the bytes.
  void PutLengthPrefixed(ByteSpan data);
  void PutString(std::string_view s) { PutLengthPrefixed(AsBytes(s)); }

  const Bytes& bytes() const { return out_; }
  Bytes Take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteSpan data) : data_(data) {}

  absl::StatusOr<uint8_t> ReadU8();
  absl::StatusOr<uint32_t> ReadU32();
  absl::StatusOr<uint64_t> ReadU64();
  absl::StatusOr<ByteSpan> ReadRaw(size_t n);
  absl::StatusOr<ByteSpan> ReadLengthPrefixed();
  absl::StatusOr<std::string> ReadString();

  template <typename Fixed>
  absl::StatusOr<Fixed> ReadFixed() {
    auto raw = ReadRaw(Fixed::kSize);
    if (!raw.ok()) return raw.status();
    return Fixed::FromSpan(*raw);
  }

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }
  absl::Status ExpectDone() const;

 private:
  ByteSpan data_;
  size_t pos_ = 0;
};

}  // namespace ldpmarket

#endif  // LDPMARKET_COMMON_BYTES_H_
