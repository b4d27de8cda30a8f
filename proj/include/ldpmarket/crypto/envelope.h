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

// Two-secret key escrow for survey responses.
//
// The system operator holds a survey pre-shared key and publishes two nonces.
// Each nonce yields a secret through HMAC-SHA-256; the response key is the
// SHA-256 of both secrets concatenated (s1 first). s1 sits on the ledger from
// the start. s2 is only committed to by its hash and released when the
// authority's deposit is in escrow, so the authority can decrypt responses
// only after paying.
//
// Primitives: SHA-256 (H), HMAC-SHA-256, AES-256-GCM (E). All backed by
// OpenSSL's EVP interface.

#ifndef LDPMARKET_CRYPTO_ENVELOPE_H_
#define LDPMARKET_CRYPTO_ENVELOPE_H_

#include <cstdint>
#include <functional>
#include <span>

#include "absl/status/statusor.h"
#include "ldpmarket/common/bytes.h"
#include "ldpmarket/common/random_stream.h"
#include "ldpmarket/ldp/rappor.h"

namespace ldpmarket::crypto {

struct PskTag { static constexpr const char* kName = "pre-shared key"; };
struct NonceTag { static constexpr const char* kName = "nonce"; };
struct SecretTag { static constexpr const char* kName = "secret"; };
struct SessionKeyTag { static constexpr const char* kName = "session key"; };
struct DigestTag { static constexpr const char* kName = "digest"; };
struct CipherNonceTag { static constexpr const char* kName = "cipher nonce"; };

using PreSharedKey = FixedBytes<32, PskTag>;
using Nonce = FixedBytes<16, NonceTag>;
using Secret = FixedBytes<32, SecretTag>;
using SessionKey = FixedBytes<32, SessionKeyTag>;
using Digest = FixedBytes<32, DigestTag>;
using CipherNonce = FixedBytes<12, CipherNonceTag>;

inline constexpr size_t kGcmTagSize = 16;

// C_R. Serialized as cipher_nonce || body, so a digest of the serialization
// commits to nonce, ciphertext and tag together.
struct Ciphertext {
  CipherNonce cipher_nonce;
  // Encrypted payload followed by the 16-byte GCM tag.
  Bytes body;

  Bytes Serialize() const;
  static absl::StatusOr<Ciphertext> Parse(ByteSpan data);

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Source of key material. Production callers use SecureRandomSource();
// simulations pass a seeded stream so runs replay.
using ByteSource = std::function<void(std::span<uint8_t>)>;
ByteSource SecureRandomSource();
ByteSource SeededSource(RandomStream& rng);

template <typename Fixed>
Fixed DrawFixed(const ByteSource& source) {
  std::array<uint8_t, Fixed::kSize> raw{};
  source(raw);
  return Fixed(raw);
}

// Raw-key HMAC-SHA-256 (any key length).
Bytes HmacSha256(ByteSpan key, ByteSpan message);

// s_i = HMAC(psk, n_i).
Secret HmacDerive(const PreSharedKey& psk, const Nonce& nonce);

// sk = H(s1 || s2). Order matters.
SessionKey DeriveSessionKey(const Secret& s1, const Secret& s2);

Digest ComputeDigest(ByteSpan data);
inline Digest ComputeDigest(std::string_view data) {
  return ComputeDigest(AsBytes(data));
}

Ciphertext Encrypt(const SessionKey& key, ByteSpan plaintext,
                   const CipherNonce& cipher_nonce);

// Fails with kUnauthenticated when the key is wrong or any byte of the
// ciphertext was altered; kInvalidArgument is reserved for malformed input
// (body shorter than the tag).
absl::StatusOr<Bytes> Decrypt(const SessionKey& key, const Ciphertext& c);

inline bool IsAuthenticationFailure(const absl::Status& s) {
  return absl::IsUnauthenticated(s);
}

// Bit-vector encoding: u32 big-endian length n, then ceil(n / 8) bytes with
// bit j at byte j / 8, most significant bit first. Padding bits are zero.
Bytes EncodeBitVector(std::span<const uint8_t> bits);
// Reads exactly one encoded vector from the front of `reader`.
absl::StatusOr<std::vector<uint8_t>> ReadBitVector(ByteReader& reader);
// Decodes a buffer holding exactly one vector; trailing bytes are an error.
absl::StatusOr<std::vector<uint8_t>> DecodeBitVector(ByteSpan data);

Bytes EncodeResponse(const ldp::ResponseVector& rv);
absl::StatusOr<ldp::ResponseVector> DecodeResponse(ByteSpan data);

}  // namespace ldpmarket::crypto

#endif  // LDPMARKET_CRYPTO_ENVELOPE_H_
