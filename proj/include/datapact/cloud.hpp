#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "datapact/cryptopipe.hpp"
#include "datapact/ledger.hpp"

namespace datapact {

struct ProviderRecord {
  std::string name;
  Address address;
  std::uint64_t registered_at = 0;
};

struct DataHandle {
  std::string handle_id;
  Address owner;
  SealedData sealed;
  SymmetricKey ks;  // held cloud-side, shared with the owner at store time
  std::uint64_t created_at = 0;
};

enum class LinkState { Fresh, Consumed, Revoked };

std::string_view link_state_name(LinkState state);

struct OneTimeLink {
  std::string link_id;  // 16 random bytes, hex
  std::string handle_id;
  PublicKey requester_pub{};
  LinkState state = LinkState::Fresh;
  std::uint64_t issued_at = 0;
  // SHA-256 of the enc_link section; lets the contract match the cloud's
  // RETRIEVED event without the secret id appearing on the ledger.
  std::string commitment;
};

struct FetchResult {
  Bytes data_ct;
  Bytes stored_digest;
};

// The cloud party: provider advertising, encrypted storage, per-requester link
// preparation, and single-use link access. fetch() is an atomic
// check-and-consume; all stored blobs are ciphertext.
class CloudNode {
 public:
  CloudNode(Ledger& ledger, Address self, std::uint64_t rng_seed);

  Address address() const { return self_; }

  ProviderRecord register_provider(const std::string& name, const Address& address);
  Address lookup_provider(const std::string& name) const;

  DataHandle store_data(const Address& owner, ByteView data);

  std::pair<OneTimeLink, EnvelopeBundle> prepare_link(const Address& owner, const std::string& handle_id,
                                                      const PublicKey& requester_pub,
                                                      const KeyPair& provider_keys);

  FetchResult fetch(const std::string& link_id);
  void revoke_link(const std::string& link_id);
  LinkState link_state(const std::string& link_id) const;
  bool has_consumed_commitment(const std::string& commitment) const;

  // Every blob the store holds, for confidentiality audits.
  std::vector<Bytes> stored_blobs() const;

  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<CloudNode> load(Ledger& ledger, const Address& self, std::uint64_t rng_seed,
                                         const std::filesystem::path& dir);

  nlohmann::ordered_json snapshot() const;

 private:
  Ledger& ledger_;
  Address self_;
  mutable std::mutex mu_;
  DeterministicRng rng_;
  std::map<std::string, ProviderRecord> providers_;
  std::map<std::string, DataHandle> handles_;
  std::map<std::string, OneTimeLink> links_;
};

}  // namespace datapact
