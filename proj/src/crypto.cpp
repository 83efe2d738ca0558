#include "datapact/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

#include "datapact/errors.hpp"

namespace datapact::crypto {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) {
      fail(ErrorCode::IoError, "libsodium initialization failed");
    }
  });
}

}  // namespace

KeyPair generate_keypair(DeterministicRng& rng) {
  ensure_sodium();
  KeyPair kp;
  rng.fill(kp.box.priv.data(), kp.box.priv.size());
  crypto_scalarmult_base(kp.box.pub.data(), kp.box.priv.data());
  std::array<std::uint8_t, 32> seed{};
  rng.fill(seed.data(), seed.size());
  crypto_sign_seed_keypair(kp.sign.pub.data(), kp.sign.priv.data(), seed.data());
  return kp;
}

Digest sha256(ByteView data) {
  ensure_sodium();
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string sha256_hex(ByteView data) {
  Digest d = sha256(data);
  return hex_encode(d);
}

Bytes aead_encrypt(const std::array<std::uint8_t, 32>& key, const std::array<std::uint8_t, kNonceSize>& nonce,
                   ByteView plaintext, ByteView aad) {
  ensure_sodium();
  Bytes out(plaintext.size() + kTagSize);
  unsigned long long written = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &written, plaintext.data(), plaintext.size(),
                                            aad.data(), aad.size(), nullptr, nonce.data(), key.data());
  out.resize(written);
  return out;
}

std::optional<Bytes> aead_decrypt(const std::array<std::uint8_t, 32>& key,
                                  const std::array<std::uint8_t, kNonceSize>& nonce, ByteView ciphertext,
                                  ByteView aad) {
  ensure_sodium();
  if (ciphertext.size() < kTagSize) {
    return std::nullopt;
  }
  Bytes out(ciphertext.size() - kTagSize);
  unsigned long long written = 0;
  int rc = crypto_aead_chacha20poly1305_ietf_decrypt(out.empty() ? nullptr : out.data(), &written, nullptr,
                                                     ciphertext.data(), ciphertext.size(), aad.data(),
                                                     aad.size(), nonce.data(), key.data());
  if (rc != 0) {
    return std::nullopt;
  }
  out.resize(written);
  return out;
}

namespace {

std::array<std::uint8_t, 32> hybrid_key(const std::array<std::uint8_t, 32>& shared, const PublicKey& eph_pub,
                                        const PublicKey& recipient_pub) {
  Bytes material;
  material.insert(material.end(), shared.begin(), shared.end());
  material.insert(material.end(), eph_pub.begin(), eph_pub.end());
  material.insert(material.end(), recipient_pub.begin(), recipient_pub.end());
  return sha256(material);
}

}  // namespace

Bytes hybrid_encrypt(ByteView plaintext, const PublicKey& recipient_pub, DeterministicRng& rng) {
  ensure_sodium();
  std::array<std::uint8_t, 32> eph_priv{};
  rng.fill(eph_priv.data(), eph_priv.size());
  PublicKey eph_pub{};
  crypto_scalarmult_base(eph_pub.data(), eph_priv.data());

  std::array<std::uint8_t, 32> shared{};
  if (crypto_scalarmult(shared.data(), eph_priv.data(), recipient_pub.data()) != 0) {
    fail(ErrorCode::LinkDecryptFailure, "degenerate recipient public key");
  }
  auto key = hybrid_key(shared, eph_pub, recipient_pub);

  std::array<std::uint8_t, kNonceSize> nonce{};
  rng.fill(nonce.data(), nonce.size());

  Bytes ct = aead_encrypt(key, nonce, plaintext, ByteView(eph_pub.data(), eph_pub.size()));
  Bytes blob;
  blob.reserve(32 + kNonceSize + ct.size());
  blob.insert(blob.end(), eph_pub.begin(), eph_pub.end());
  blob.insert(blob.end(), nonce.begin(), nonce.end());
  blob.insert(blob.end(), ct.begin(), ct.end());
  return blob;
}

std::optional<Bytes> hybrid_decrypt(ByteView blob, const BoxKeyPair& recipient) {
  ensure_sodium();
  if (blob.size() < 32 + kNonceSize + kTagSize) {
    return std::nullopt;
  }
  PublicKey eph_pub{};
  std::memcpy(eph_pub.data(), blob.data(), 32);
  std::array<std::uint8_t, kNonceSize> nonce{};
  std::memcpy(nonce.data(), blob.data() + 32, kNonceSize);

  std::array<std::uint8_t, 32> shared{};
  if (crypto_scalarmult(shared.data(), recipient.priv.data(), eph_pub.data()) != 0) {
    return std::nullopt;
  }
  auto key = hybrid_key(shared, eph_pub, recipient.pub);
  return aead_decrypt(key, nonce, blob.subspan(32 + kNonceSize), ByteView(eph_pub.data(), eph_pub.size()));
}

Signature sign_detached(const SignKeyPair& signer, ByteView message) {
  ensure_sodium();
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), signer.priv.data());
  return sig;
}

bool verify_detached(const Signature& sig, ByteView message, const PublicKey& signer_pub) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), signer_pub.data()) == 0;
}

}  // namespace datapact::crypto
