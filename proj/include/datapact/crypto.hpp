#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "datapact/bytes.hpp"
#include "datapact/rng.hpp"

namespace datapact::crypto {

using Digest = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;
using PublicKey = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

struct BoxKeyPair {
  PublicKey pub{};
  std::array<std::uint8_t, 32> priv{};
};

struct SignKeyPair {
  PublicKey pub{};
  std::array<std::uint8_t, 64> priv{};
};

// Each party holds both capabilities: key agreement (X25519) and signing (Ed25519).
struct KeyPair {
  BoxKeyPair box;
  SignKeyPair sign;
};

KeyPair generate_keypair(DeterministicRng& rng);

Digest sha256(ByteView data);
std::string sha256_hex(ByteView data);

// ChaCha20-Poly1305-IETF; 256-bit key, explicit 12-byte nonce, 16-byte tag.
Bytes aead_encrypt(const std::array<std::uint8_t, 32>& key, const std::array<std::uint8_t, kNonceSize>& nonce,
                   ByteView plaintext, ByteView aad);
std::optional<Bytes> aead_decrypt(const std::array<std::uint8_t, 32>& key,
                                  const std::array<std::uint8_t, kNonceSize>& nonce, ByteView ciphertext,
                                  ByteView aad);

// Ephemeral-static X25519 hybrid: blob = eph_pub(32) || nonce(12) || aead_ct.
// The AEAD key is SHA-256(shared || eph_pub || recipient_pub).
Bytes hybrid_encrypt(ByteView plaintext, const PublicKey& recipient_pub, DeterministicRng& rng);
std::optional<Bytes> hybrid_decrypt(ByteView blob, const BoxKeyPair& recipient);

Signature sign_detached(const SignKeyPair& signer, ByteView message);
bool verify_detached(const Signature& sig, ByteView message, const PublicKey& signer_pub);

}  // namespace datapact::crypto
