#pragma once

#include <array>
#include <cstdint>

#include "datapact/bytes.hpp"
#include "datapact/crypto.hpp"
#include "datapact/rng.hpp"

namespace datapact {

using crypto::KeyPair;
using crypto::PublicKey;

struct SymmetricKey {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const SymmetricKey&) const = default;
};

SymmetricKey generate_symmetric_key(DeterministicRng& rng);

// SHA-256 of the payload; the value the cloud keeps encrypted alongside the data.
crypto::Digest hash_data(ByteView data);

// The two ciphertexts the cloud stores: the data and its hash, both under ks.
// Each blob is nonce(12) || aead ciphertext+tag, domain-separated by AAD so the
// sections cannot be swapped for one another.
struct SealedData {
  Bytes data_ct;
  Bytes stored_digest;
};

SealedData seal_for_cloud(ByteView data, const SymmetricKey& ks, DeterministicRng& rng);

// Symmetric-side inverse of seal_for_cloud: authenticates both sections and
// checks the data hash against the stored digest. Throws AuthFailure /
// DigestMismatch.
Bytes open_sealed_data(const SealedData& sealed, const SymmetricKey& ks);

// ks wrapped for transport: hybrid ciphertext to the requester, followed by the
// provider's Ed25519 signature over that ciphertext. Verification against the
// provider's public key is mandatory before the key is released.
Bytes wrap_key_for_requester(const SymmetricKey& ks, const KeyPair& provider, const PublicKey& requester_pub,
                             DeterministicRng& rng);
SymmetricKey unwrap_key(ByteView wrapped, const KeyPair& requester, const PublicKey& provider_sign_pub);

// Container for the four pipeline sections. Serializes to: magic "DPEB",
// version 0x01, then each section as u32 big-endian length + bytes in the
// order wrapped_key, enc_link, data_ct, stored_digest.
struct EnvelopeBundle {
  Bytes wrapped_key;
  Bytes enc_link;
  Bytes data_ct;
  Bytes stored_digest;

  bool complete() const;
  Bytes serialize() const;
  static EnvelopeBundle deserialize(ByteView raw);  // throws MalformedBundle

  bool operator==(const EnvelopeBundle&) const = default;
};

EnvelopeBundle make_bundle(ByteView data, ByteView link_id, const SymmetricKey& ks, const KeyPair& provider,
                           const PublicKey& requester_pub, DeterministicRng& rng);

// Runs the retrieval pipeline in step order: (1) verify and unwrap ks against
// the provider key, (2) decrypt the link with the requester key, (3) decrypt
// the data with ks, then check the data hash against the decrypted stored
// digest. Throws SignatureInvalid / LinkDecryptFailure / AuthFailure /
// DigestMismatch identifying the earliest failing step.
Bytes open_pipeline(const EnvelopeBundle& bundle, const KeyPair& requester, const PublicKey& provider_sign_pub);

}  // namespace datapact
