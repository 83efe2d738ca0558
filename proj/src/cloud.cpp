#include "datapact/cloud.hpp"

#include <fstream>

namespace datapact {

std::string_view link_state_name(LinkState state) {
  switch (state) {
    case LinkState::Fresh: return "fresh";
    case LinkState::Consumed: return "consumed";
    case LinkState::Revoked: return "revoked";
  }
  return "unknown";
}

namespace {

LinkState link_state_from_name(std::string_view name) {
  for (LinkState s : {LinkState::Fresh, LinkState::Consumed, LinkState::Revoked}) {
    if (link_state_name(s) == name) return s;
  }
  throw Error(ErrorCode::ParseError, "unknown link state '" + std::string(name) + "'");
}

}  // namespace

CloudNode::CloudNode(Ledger& ledger, Address self, std::uint64_t rng_seed)
    : ledger_(ledger), self_(self), rng_(rng_seed) {}

ProviderRecord CloudNode::register_provider(const std::string& name, const Address& address) {
  std::lock_guard lock(mu_);
  if (providers_.contains(name)) {
    fail(ErrorCode::NameTaken, "provider name '" + name + "' already registered");
  }
  ProviderRecord rec{name, address, ledger_.now()};
  providers_.emplace(name, rec);
  ledger_.append_event(self_, "REGISTER", {{"name", name}, {"provider", address.to_hex()}});
  return rec;
}

Address CloudNode::lookup_provider(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = providers_.find(name);
  if (it == providers_.end()) {
    fail(ErrorCode::UnknownProvider, "no provider named '" + name + "'");
  }
  return it->second.address;
}

DataHandle CloudNode::store_data(const Address& owner, ByteView data) {
  std::lock_guard lock(mu_);
  bool registered = false;
  for (const auto& [name, rec] : providers_) {
    if (rec.address == owner) {
      registered = true;
      break;
    }
  }
  if (!registered) {
    fail(ErrorCode::UnknownProvider, owner.to_hex() + " is not a registered provider");
  }
  DataHandle handle;
  handle.handle_id = hex_encode(rng_.bytes(16));
  handle.owner = owner;
  handle.ks = generate_symmetric_key(rng_);
  handle.sealed = seal_for_cloud(data, handle.ks, rng_);
  handle.created_at = ledger_.now();
  handles_.emplace(handle.handle_id, handle);
  ledger_.append_event(self_, "STORE",
                       {{"handle", handle.handle_id},
                        {"owner", owner.to_hex()},
                        {"size", std::to_string(data.size())}});
  return handle;
}

std::pair<OneTimeLink, EnvelopeBundle> CloudNode::prepare_link(const Address& owner,
                                                               const std::string& handle_id,
                                                               const PublicKey& requester_pub,
                                                               const KeyPair& provider_keys) {
  std::lock_guard lock(mu_);
  auto it = handles_.find(handle_id);
  if (it == handles_.end()) {
    fail(ErrorCode::UnknownHandle, "no handle " + handle_id);
  }
  const DataHandle& handle = it->second;
  if (handle.owner != owner) {
    fail(ErrorCode::NotOwner, owner.to_hex() + " does not own handle " + handle_id);
  }

  OneTimeLink link;
  do {
    link.link_id = hex_encode(rng_.bytes(16));
  } while (links_.contains(link.link_id));
  link.handle_id = handle_id;
  link.requester_pub = requester_pub;
  link.state = LinkState::Fresh;
  link.issued_at = ledger_.now();

  EnvelopeBundle bundle;
  bundle.wrapped_key = wrap_key_for_requester(handle.ks, provider_keys, requester_pub, rng_);
  bundle.enc_link = crypto::hybrid_encrypt(to_bytes(link.link_id), requester_pub, rng_);
  link.commitment = crypto::sha256_hex(bundle.enc_link);

  links_.emplace(link.link_id, link);
  ledger_.append_event(self_, "LINK_PREPARED",
                       {{"handle", handle_id}, {"link_commitment", link.commitment}});
  // The data sections stay behind the link; the bundle the provider forwards
  // carries only the wrapped key and the encrypted link.
  return {link, bundle};
}

FetchResult CloudNode::fetch(const std::string& link_id) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end()) {
    fail(ErrorCode::UnknownLink, "no such link");
  }
  OneTimeLink& link = it->second;
  if (link.state != LinkState::Fresh) {
    fail(ErrorCode::LinkExpired, "link already " + std::string(link_state_name(link.state)));
  }
  const DataHandle& handle = handles_.at(link.handle_id);
  link.state = LinkState::Consumed;
  ledger_.append_event(self_, "RETRIEVED",
                       {{"handle", link.handle_id}, {"link_commitment", link.commitment}});
  return FetchResult{handle.sealed.data_ct, handle.sealed.stored_digest};
}

void CloudNode::revoke_link(const std::string& link_id) {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end()) {
    fail(ErrorCode::UnknownLink, "no such link");
  }
  if (it->second.state != LinkState::Fresh) {
    fail(ErrorCode::LinkExpired, "link already " + std::string(link_state_name(it->second.state)));
  }
  it->second.state = LinkState::Revoked;
  ledger_.append_event(self_, "LINK_REVOKED",
                       {{"handle", it->second.handle_id}, {"link_commitment", it->second.commitment}});
}

LinkState CloudNode::link_state(const std::string& link_id) const {
  std::lock_guard lock(mu_);
  auto it = links_.find(link_id);
  if (it == links_.end()) {
    fail(ErrorCode::UnknownLink, "no such link");
  }
  return it->second.state;
}

bool CloudNode::has_consumed_commitment(const std::string& commitment) const {
  std::lock_guard lock(mu_);
  for (const auto& [id, link] : links_) {
    if (link.commitment == commitment && link.state == LinkState::Consumed) {
      return true;
    }
  }
  return false;
}

std::vector<Bytes> CloudNode::stored_blobs() const {
  std::lock_guard lock(mu_);
  std::vector<Bytes> out;
  for (const auto& [id, handle] : handles_) {
    out.push_back(handle.sealed.data_ct);
    out.push_back(handle.sealed.stored_digest);
  }
  return out;
}

void CloudNode::save(const std::filesystem::path& dir) const {
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json registry;
  registry["providers"] = nlohmann::ordered_json::array();
  for (const auto& [name, rec] : providers_) {
    registry["providers"].push_back({{"name", rec.name},
                                     {"address", rec.address.to_hex()},
                                     {"registered_at", rec.registered_at}});
  }

  nlohmann::ordered_json handles;
  handles["handles"] = nlohmann::ordered_json::array();
  for (const auto& [id, handle] : handles_) {
    handles["handles"].push_back({{"handle_id", handle.handle_id},
                                  {"owner", handle.owner.to_hex()},
                                  {"created_at", handle.created_at},
                                  {"ks", hex_encode(handle.ks.bytes)}});
    // Payload sections ride in the bundle container with the transport
    // sections left empty.
    EnvelopeBundle at_rest;
    at_rest.data_ct = handle.sealed.data_ct;
    at_rest.stored_digest = handle.sealed.stored_digest;
    Bytes blob = at_rest.serialize();
    std::ofstream out(dir / (handle.handle_id + ".bundle"), std::ios::binary);
    if (!out) {
      fail(ErrorCode::IoError, "cannot write handle bundle");
    }
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  }

  nlohmann::ordered_json links;
  links["links"] = nlohmann::ordered_json::array();
  for (const auto& [id, link] : links_) {
    links["links"].push_back({{"link_id", link.link_id},
                              {"handle_id", link.handle_id},
                              {"requester_pub", hex_encode(link.requester_pub)},
                              {"state", std::string(link_state_name(link.state))},
                              {"issued_at", link.issued_at},
                              {"commitment", link.commitment}});
  }

  for (const auto& [file, doc] : std::initializer_list<std::pair<const char*, const nlohmann::ordered_json*>>{
           {"registry.json", &registry}, {"handles.json", &handles}, {"links.json", &links}}) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) {
      fail(ErrorCode::IoError, std::string("cannot write ") + file);
    }
    out << doc->dump(2) << '\n';
  }
}

namespace {

nlohmann::json load_json(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + file.string());
  }
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

}  // namespace

std::unique_ptr<CloudNode> CloudNode::load(Ledger& ledger, const Address& self, std::uint64_t rng_seed,
                                            const std::filesystem::path& dir) {
  auto node = std::make_unique<CloudNode>(ledger, self, rng_seed);

  nlohmann::json registry = load_json(dir / "registry.json");
  for (const auto& entry : registry.at("providers")) {
    ProviderRecord rec;
    rec.name = entry.at("name").get<std::string>();
    rec.address = Address::from_hex(entry.at("address").get<std::string>());
    rec.registered_at = entry.at("registered_at").get<std::uint64_t>();
    node->providers_.emplace(rec.name, rec);
  }

  nlohmann::json handles = load_json(dir / "handles.json");
  for (const auto& entry : handles.at("handles")) {
    DataHandle handle;
    handle.handle_id = entry.at("handle_id").get<std::string>();
    handle.owner = Address::from_hex(entry.at("owner").get<std::string>());
    handle.created_at = entry.at("created_at").get<std::uint64_t>();
    Bytes ks = hex_decode(entry.at("ks").get<std::string>());
    if (ks.size() != handle.ks.bytes.size()) {
      fail(ErrorCode::ParseError, "handle ks must be 32 bytes");
    }
    std::copy(ks.begin(), ks.end(), handle.ks.bytes.begin());

    std::ifstream in(dir / (handle.handle_id + ".bundle"), std::ios::binary);
    if (!in) {
      fail(ErrorCode::IoError, "missing bundle for handle " + handle.handle_id);
    }
    Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EnvelopeBundle at_rest = EnvelopeBundle::deserialize(blob);
    handle.sealed.data_ct = std::move(at_rest.data_ct);
    handle.sealed.stored_digest = std::move(at_rest.stored_digest);
    node->handles_.emplace(handle.handle_id, std::move(handle));
  }

  nlohmann::json links = load_json(dir / "links.json");
  for (const auto& entry : links.at("links")) {
    OneTimeLink link;
    link.link_id = entry.at("link_id").get<std::string>();
    link.handle_id = entry.at("handle_id").get<std::string>();
    Bytes pub = hex_decode(entry.at("requester_pub").get<std::string>());
    if (pub.size() != link.requester_pub.size()) {
      fail(ErrorCode::ParseError, "requester_pub must be 32 bytes");
    }
    std::copy(pub.begin(), pub.end(), link.requester_pub.begin());
    link.state = link_state_from_name(entry.at("state").get<std::string>());
    link.issued_at = entry.at("issued_at").get<std::uint64_t>();
    link.commitment = entry.at("commitment").get<std::string>();
    node->links_.emplace(link.link_id, std::move(link));
  }

  return node;
}

nlohmann::ordered_json CloudNode::snapshot() const {
  std::lock_guard lock(mu_);
  nlohmann::ordered_json j;
  j["providers"] = nlohmann::ordered_json::array();
  for (const auto& [name, rec] : providers_) {
    j["providers"].push_back(
        {{"name", rec.name}, {"address", rec.address.to_hex()}, {"registered_at", rec.registered_at}});
  }
  j["handles"] = nlohmann::ordered_json::array();
  for (const auto& [id, handle] : handles_) {
    j["handles"].push_back({{"handle_id", handle.handle_id},
                            {"owner", handle.owner.to_hex()},
                            {"created_at", handle.created_at},
                            {"ks", hex_encode(handle.ks.bytes)},
                            {"data_ct", hex_encode(handle.sealed.data_ct)},
                            {"stored_digest", hex_encode(handle.sealed.stored_digest)}});
  }
  j["links"] = nlohmann::ordered_json::array();
  for (const auto& [id, link] : links_) {
    j["links"].push_back({{"link_id", link.link_id},
                          {"handle_id", link.handle_id},
                          {"requester_pub", hex_encode(link.requester_pub)},
                          {"state", std::string(link_state_name(link.state))},
                          {"issued_at", link.issued_at},
                          {"commitment", link.commitment}});
  }
  return j;
}

}  // namespace datapact
