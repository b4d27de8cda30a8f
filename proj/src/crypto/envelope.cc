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

#include "ldpmarket/crypto/envelope.h"

#include <memory>
#include <stdexcept>

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ldpmarket::crypto {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx NewCipherCtx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  // Allocation failure inside libcrypto is not recoverable here.
  if (!ctx) throw std::bad_alloc();
  return ctx;
}

// OpenSSL only fails these calls on programmer error (bad sizes) or OOM.
void Check(int rc, const char* what) {
  if (rc != 1) throw std::runtime_error(absl::StrCat("OpenSSL: ", what));
}

}  // namespace

Bytes Ciphertext::Serialize() const {
  Bytes out(cipher_nonce.span().begin(), cipher_nonce.span().end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

absl::StatusOr<Ciphertext> Ciphertext::Parse(ByteSpan data) {
  if (data.size() < CipherNonce::kSize + kGcmTagSize) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ciphertext too short: ", data.size(), " bytes, need at least ",
        CipherNonce::kSize + kGcmTagSize));
  }
  Ciphertext c;
  c.cipher_nonce = *CipherNonce::FromSpan(data.first(CipherNonce::kSize));
  c.body.assign(data.begin() + CipherNonce::kSize, data.end());
  return c;
}

ByteSource SecureRandomSource() {
  return [](std::span<uint8_t> out) {
    Check(RAND_bytes(out.data(), static_cast<int>(out.size())), "RAND_bytes");
  };
}

ByteSource SeededSource(RandomStream& rng) {
  return [&rng](std::span<uint8_t> out) { rng.FillBytes(out); };
}

Bytes HmacSha256(ByteSpan key, ByteSpan message) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int out_len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           message.data(), message.size(), out.data(), &out_len) == nullptr) {
    throw std::runtime_error("OpenSSL: HMAC");
  }
  out.resize(out_len);
  return out;
}

Secret HmacDerive(const PreSharedKey& psk, const Nonce& nonce) {
  return *Secret::FromSpan(HmacSha256(psk.span(), nonce.span()));
}

SessionKey DeriveSessionKey(const Secret& s1, const Secret& s2) {
  ByteWriter w;
  w.PutRaw(s1.span());
  w.PutRaw(s2.span());
  return *SessionKey::FromSpan(ComputeDigest(w.bytes()).span());
}

Digest ComputeDigest(ByteSpan data) {
  std::array<uint8_t, 32> out{};
  unsigned int out_len = 0;
  Check(EVP_Digest(data.data(), data.size(), out.data(), &out_len,
                   EVP_sha256(), nullptr),
        "EVP_Digest");
  return Digest(out);
}

Ciphertext Encrypt(const SessionKey& key, ByteSpan plaintext,
                   const CipherNonce& cipher_nonce) {
  CipherCtx ctx = NewCipherCtx();
  Check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr,
                           nullptr),
        "EncryptInit");
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN,
                            CipherNonce::kSize, nullptr),
        "SET_IVLEN");
  Check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.span().data(),
                           cipher_nonce.span().data()),
        "EncryptInit key");

  Ciphertext c;
  c.cipher_nonce = cipher_nonce;
  c.body.resize(plaintext.size() + kGcmTagSize);
  int len = 0;
  if (!plaintext.empty()) {
    Check(EVP_EncryptUpdate(ctx.get(), c.body.data(), &len, plaintext.data(),
                            static_cast<int>(plaintext.size())),
          "EncryptUpdate");
  }
  int final_len = 0;
  Check(EVP_EncryptFinal_ex(ctx.get(), c.body.data() + len, &final_len),
        "EncryptFinal");
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                            c.body.data() + plaintext.size()),
        "GET_TAG");
  return c;
}

absl::StatusOr<Bytes> Decrypt(const SessionKey& key, const Ciphertext& c) {
  if (c.body.size() < kGcmTagSize) {
    return absl::InvalidArgumentError(
        absl::StrCat("ciphertext body of ", c.body.size(),
                     " bytes cannot hold a ", kGcmTagSize, "-byte tag"));
  }
  const size_t payload_size = c.body.size() - kGcmTagSize;
  CipherCtx ctx = NewCipherCtx();
  Check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr,
                           nullptr),
        "DecryptInit");
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN,
                            CipherNonce::kSize, nullptr),
        "SET_IVLEN");
  Check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.span().data(),
                           c.cipher_nonce.span().data()),
        "DecryptInit key");

  Bytes plaintext(payload_size);
  int len = 0;
  if (payload_size > 0) {
    Check(EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, c.body.data(),
                            static_cast<int>(payload_size)),
          "DecryptUpdate");
  }
  // The tag buffer is only read; OpenSSL's signature is not const-correct.
  Bytes tag(c.body.end() - kGcmTagSize, c.body.end());
  Check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize,
                            tag.data()),
        "SET_TAG");
  int final_len = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + len, &final_len) !=
      1) {
    return absl::UnauthenticatedError(
        "decryption failed: authentication tag mismatch");
  }
  return plaintext;
}

Bytes EncodeBitVector(std::span<const uint8_t> bits) {
  ByteWriter w;
  w.PutU32(static_cast<uint32_t>(bits.size()));
  Bytes packed((bits.size() + 7) / 8, 0);
  for (size_t j = 0; j < bits.size(); ++j) {
    if (bits[j]) packed[j / 8] |= static_cast<uint8_t>(0x80u >> (j % 8));
  }
  w.PutRaw(packed);
  return w.Take();
}

absl::StatusOr<std::vector<uint8_t>> ReadBitVector(ByteReader& reader) {
  auto n = reader.ReadU32();
  if (!n.ok()) return n.status();
  const size_t packed_size = (static_cast<size_t>(*n) + 7) / 8;
  auto packed = reader.ReadRaw(packed_size);
  if (!packed.ok()) {
    return absl::DataLossError(absl::StrCat(
        "bit vector of length ", *n, " needs ", packed_size,
        " payload bytes: ", packed.status().message()));
  }
  std::vector<uint8_t> bits(*n, 0);
  for (size_t j = 0; j < bits.size(); ++j) {
    bits[j] = ((*packed)[j / 8] >> (7 - j % 8)) & 1u;
  }
  const size_t used_in_last = bits.size() % 8;
  if (used_in_last != 0) {
    const uint8_t pad_mask = static_cast<uint8_t>(0xffu >> used_in_last);
    if ((packed->back() & pad_mask) != 0) {
      return absl::DataLossError("nonzero padding bits in bit vector");
    }
  }
  return bits;
}

absl::StatusOr<std::vector<uint8_t>> DecodeBitVector(ByteSpan data) {
  ByteReader reader(data);
  auto bits = ReadBitVector(reader);
  if (!bits.ok()) return bits.status();
  if (absl::Status s = reader.ExpectDone(); !s.ok()) return s;
  return bits;
}

Bytes EncodeResponse(const ldp::ResponseVector& rv) {
  return EncodeBitVector(rv.bits());
}

absl::StatusOr<ldp::ResponseVector> DecodeResponse(ByteSpan data) {
  auto bits = DecodeBitVector(data);
  if (!bits.ok()) return bits.status();
  return ldp::ResponseVector::FromBits(*bits);
}

}  // namespace ldpmarket::crypto
