#include "datapact/cryptopipe.hpp"

#include <cstring>

#include "datapact/errors.hpp"

namespace datapact {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'D', 'P', 'E', 'B'};
constexpr std::uint8_t kVersion = 1;

const Bytes kDataAad = to_bytes("datapact:data");
const Bytes kDigestAad = to_bytes("datapact:digest");

Bytes seal_section(ByteView plaintext, const SymmetricKey& ks, ByteView aad, DeterministicRng& rng) {
  std::array<std::uint8_t, crypto::kNonceSize> nonce{};
  rng.fill(nonce.data(), nonce.size());
  Bytes ct = crypto::aead_encrypt(ks.bytes, nonce, plaintext, aad);
  Bytes out(crypto::kNonceSize + ct.size());
  std::memcpy(out.data(), nonce.data(), crypto::kNonceSize);
  std::memcpy(out.data() + crypto::kNonceSize, ct.data(), ct.size());
  return out;
}

std::optional<Bytes> open_section(ByteView blob, const SymmetricKey& ks, ByteView aad) {
  if (blob.size() < crypto::kNonceSize + crypto::kTagSize) {
    return std::nullopt;
  }
  std::array<std::uint8_t, crypto::kNonceSize> nonce{};
  std::memcpy(nonce.data(), blob.data(), crypto::kNonceSize);
  return crypto::aead_decrypt(ks.bytes, nonce, blob.subspan(crypto::kNonceSize), aad);
}

}  // namespace

SymmetricKey generate_symmetric_key(DeterministicRng& rng) {
  SymmetricKey ks;
  rng.fill(ks.bytes.data(), ks.bytes.size());
  return ks;
}

crypto::Digest hash_data(ByteView data) {
  return crypto::sha256(data);
}

SealedData seal_for_cloud(ByteView data, const SymmetricKey& ks, DeterministicRng& rng) {
  SealedData sealed;
  sealed.data_ct = seal_section(data, ks, kDataAad, rng);
  crypto::Digest digest = hash_data(data);
  sealed.stored_digest = seal_section(ByteView(digest.data(), digest.size()), ks, kDigestAad, rng);
  return sealed;
}

Bytes open_sealed_data(const SealedData& sealed, const SymmetricKey& ks) {
  auto data = open_section(sealed.data_ct, ks, kDataAad);
  if (!data) {
    fail(ErrorCode::AuthFailure, "data ciphertext fails authentication");
  }
  auto stored = open_section(sealed.stored_digest, ks, kDigestAad);
  if (!stored || stored->size() != 32) {
    fail(ErrorCode::DigestMismatch, "stored digest cannot be recovered");
  }
  crypto::Digest actual = hash_data(*data);
  if (!std::equal(actual.begin(), actual.end(), stored->begin())) {
    fail(ErrorCode::DigestMismatch, "data hash does not match the stored digest");
  }
  return *data;
}

Bytes wrap_key_for_requester(const SymmetricKey& ks, const KeyPair& provider, const PublicKey& requester_pub,
                             DeterministicRng& rng) {
  Bytes ct = crypto::hybrid_encrypt(ByteView(ks.bytes.data(), ks.bytes.size()), requester_pub, rng);
  crypto::Signature sig = crypto::sign_detached(provider.sign, ct);
  Bytes out = ct;
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

namespace {

// Split a wrapped key into (ciphertext, signature) and verify the signature.
ByteView verify_wrapped(ByteView wrapped, const PublicKey& provider_sign_pub) {
  if (wrapped.size() <= 64) {
    fail(ErrorCode::SignatureInvalid, "wrapped key too short");
  }
  ByteView ct = wrapped.first(wrapped.size() - 64);
  crypto::Signature sig{};
  std::memcpy(sig.data(), wrapped.data() + ct.size(), 64);
  if (!crypto::verify_detached(sig, ct, provider_sign_pub)) {
    fail(ErrorCode::SignatureInvalid, "provider signature does not verify");
  }
  return ct;
}

SymmetricKey release_key(ByteView ct, const KeyPair& requester) {
  auto plain = crypto::hybrid_decrypt(ct, requester.box);
  if (!plain || plain->size() != 32) {
    fail(ErrorCode::SignatureInvalid, "wrapped key cannot be released");
  }
  SymmetricKey ks;
  std::memcpy(ks.bytes.data(), plain->data(), 32);
  return ks;
}

}  // namespace

SymmetricKey unwrap_key(ByteView wrapped, const KeyPair& requester, const PublicKey& provider_sign_pub) {
  ByteView ct = verify_wrapped(wrapped, provider_sign_pub);
  return release_key(ct, requester);
}

bool EnvelopeBundle::complete() const {
  return !wrapped_key.empty() && !enc_link.empty() && !data_ct.empty() && !stored_digest.empty();
}

Bytes EnvelopeBundle::serialize() const {
  Bytes out(kMagic.begin(), kMagic.end());
  out.push_back(kVersion);
  for (const Bytes* section : {&wrapped_key, &enc_link, &data_ct, &stored_digest}) {
    if (section->size() > 0xffffffffULL) {
      fail(ErrorCode::MalformedBundle, "section too large");
    }
    put_u32_be(out, static_cast<std::uint32_t>(section->size()));
    out.insert(out.end(), section->begin(), section->end());
  }
  return out;
}

EnvelopeBundle EnvelopeBundle::deserialize(ByteView raw) {
  if (raw.size() < kMagic.size() + 1 || !std::equal(kMagic.begin(), kMagic.end(), raw.begin())) {
    fail(ErrorCode::MalformedBundle, "bad magic");
  }
  if (raw[4] != kVersion) {
    fail(ErrorCode::MalformedBundle, "unsupported version");
  }
  std::size_t pos = 5;
  EnvelopeBundle bundle;
  for (Bytes* section : {&bundle.wrapped_key, &bundle.enc_link, &bundle.data_ct, &bundle.stored_digest}) {
    if (pos + 4 > raw.size()) {
      fail(ErrorCode::MalformedBundle, "truncated section header");
    }
    std::uint32_t len = (std::uint32_t(raw[pos]) << 24) | (std::uint32_t(raw[pos + 1]) << 16) |
                        (std::uint32_t(raw[pos + 2]) << 8) | std::uint32_t(raw[pos + 3]);
    pos += 4;
    if (pos + len > raw.size()) {
      fail(ErrorCode::MalformedBundle, "truncated section body");
    }
    section->assign(raw.begin() + pos, raw.begin() + pos + len);
    pos += len;
  }
  if (pos != raw.size()) {
    fail(ErrorCode::MalformedBundle, "trailing bytes after last section");
  }
  return bundle;
}

EnvelopeBundle make_bundle(ByteView data, ByteView link_id, const SymmetricKey& ks, const KeyPair& provider,
                           const PublicKey& requester_pub, DeterministicRng& rng) {
  EnvelopeBundle bundle;
  SealedData sealed = seal_for_cloud(data, ks, rng);
  bundle.data_ct = std::move(sealed.data_ct);
  bundle.stored_digest = std::move(sealed.stored_digest);
  bundle.wrapped_key = wrap_key_for_requester(ks, provider, requester_pub, rng);
  bundle.enc_link = crypto::hybrid_encrypt(link_id, requester_pub, rng);
  return bundle;
}

Bytes open_pipeline(const EnvelopeBundle& bundle, const KeyPair& requester, const PublicKey& provider_sign_pub) {
  if (!bundle.complete()) {
    fail(ErrorCode::MalformedBundle, "bundle is missing sections");
  }

  // Step 1: the provider key gates everything; nothing is decrypted until the
  // wrapped key's signature verifies.
  ByteView wrapped_ct = verify_wrapped(bundle.wrapped_key, provider_sign_pub);

  // Step 2: recover the link with the requester's private key.
  auto link = crypto::hybrid_decrypt(bundle.enc_link, requester.box);
  if (!link) {
    fail(ErrorCode::LinkDecryptFailure, "link ciphertext does not decrypt for this requester");
  }

  SymmetricKey ks = release_key(wrapped_ct, requester);

  // Step 3: symmetric decryption of the payload.
  auto data = open_section(bundle.data_ct, ks, kDataAad);
  if (!data) {
    fail(ErrorCode::AuthFailure, "data ciphertext fails authentication");
  }

  // Integrity check: the decrypted stored digest must match the data hash.
  auto stored = open_section(bundle.stored_digest, ks, kDigestAad);
  if (!stored || stored->size() != 32) {
    fail(ErrorCode::DigestMismatch, "stored digest cannot be recovered");
  }
  crypto::Digest actual = hash_data(*data);
  if (!std::equal(actual.begin(), actual.end(), stored->begin())) {
    fail(ErrorCode::DigestMismatch, "data hash does not match the stored digest");
  }
  return *data;
}

}  // namespace datapact
