#include "datapact/negotiation.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace datapact {

void AgreementTerms::validate() const {
  if (requester_address == provider_address) {
    fail(ErrorCode::InvalidTerms, "requester and provider must be distinct parties");
  }
  if (voter_list.empty()) {
    fail(ErrorCode::InvalidTerms, "voter_list must not be empty");
  }
  std::set<Address> seen;
  for (const Address& arbiter : voter_list) {
    if (!seen.insert(arbiter).second) {
      fail(ErrorCode::InvalidTerms, "voter_list contains duplicate arbiter " + arbiter.to_hex());
    }
    if (arbiter == requester_address || arbiter == provider_address) {
      fail(ErrorCode::InvalidTerms, "arbiter " + arbiter.to_hex() + " is a party to the agreement");
    }
  }
  if (quorum < 1 || quorum > voter_list.size()) {
    fail(ErrorCode::InvalidTerms, "quorum must be between 1 and the voter count");
  }
  if (!(voting_margin > 0.0) || voting_margin > 1.0) {
    fail(ErrorCode::InvalidTerms, "voting_margin must be in (0, 1]");
  }
  if (voting_time == 0) {
    fail(ErrorCode::InvalidTerms, "voting_time must be positive");
  }
  if (contract_lifetime <= voting_time) {
    fail(ErrorCode::InvalidTerms, "contract_lifetime must exceed voting_time");
  }
  if (default_compensation > requester_deposit + provider_deposit) {
    fail(ErrorCode::InvalidTerms, "default_compensation exceeds the combined deposits");
  }
}

namespace {

void put_string(Bytes& out, std::string_view s) {
  put_u32_be(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void put_address(Bytes& out, const Address& a) {
  out.insert(out.end(), a.bytes.begin(), a.bytes.end());
}

}  // namespace

Bytes AgreementTerms::canonical_bytes() const {
  Bytes out;
  put_string(out, requester_name);
  put_address(out, requester_address);
  put_string(out, provider_name);
  put_address(out, provider_address);
  put_u64_be(out, payment.amount);
  put_u64_be(out, requester_deposit.amount);
  put_u64_be(out, provider_deposit.amount);
  put_u64_be(out, gas_money.amount);
  put_string(out, breach_condition);
  put_u32_be(out, static_cast<std::uint32_t>(voter_list.size()));
  for (const Address& arbiter : voter_list) {
    put_address(out, arbiter);
  }
  put_u32_be(out, quorum);
  put_u64_be(out, voting_time);
  put_u64_be(out, std::bit_cast<std::uint64_t>(voting_margin));
  put_u64_be(out, contract_lifetime);
  put_u64_be(out, default_compensation.amount);
  return out;
}

Digest AgreementTerms::digest() const {
  return crypto::sha256(canonical_bytes());
}

nlohmann::ordered_json AgreementTerms::to_json() const {
  nlohmann::ordered_json j;
  j["requester_name"] = requester_name;
  j["requester_address"] = requester_address.to_hex();
  j["provider_name"] = provider_name;
  j["provider_address"] = provider_address.to_hex();
  j["payment"] = payment.amount;
  j["requester_deposit"] = requester_deposit.amount;
  j["provider_deposit"] = provider_deposit.amount;
  j["gas_money"] = gas_money.amount;
  j["breach_condition"] = breach_condition;
  j["voter_list"] = nlohmann::ordered_json::array();
  for (const Address& arbiter : voter_list) {
    j["voter_list"].push_back(arbiter.to_hex());
  }
  j["quorum"] = quorum;
  j["voting_time"] = voting_time;
  j["voting_margin"] = voting_margin;
  j["contract_lifetime"] = contract_lifetime;
  j["default_compensation"] = default_compensation.amount;
  return j;
}

AgreementTerms AgreementTerms::from_json(const nlohmann::json& j) {
  AgreementTerms t;
  try {
    t.requester_name = j.at("requester_name").get<std::string>();
    t.requester_address = Address::from_hex(j.at("requester_address").get<std::string>());
    t.provider_name = j.at("provider_name").get<std::string>();
    t.provider_address = Address::from_hex(j.at("provider_address").get<std::string>());
    t.payment = Wei{j.at("payment").get<std::uint64_t>()};
    t.requester_deposit = Wei{j.at("requester_deposit").get<std::uint64_t>()};
    t.provider_deposit = Wei{j.at("provider_deposit").get<std::uint64_t>()};
    t.gas_money = Wei{j.at("gas_money").get<std::uint64_t>()};
    t.breach_condition = j.at("breach_condition").get<std::string>();
    for (const auto& v : j.at("voter_list")) {
      t.voter_list.push_back(Address::from_hex(v.get<std::string>()));
    }
    t.quorum = j.at("quorum").get<std::uint32_t>();
    t.voting_time = j.at("voting_time").get<std::uint64_t>();
    t.voting_margin = j.at("voting_margin").get<double>();
    t.contract_lifetime = j.at("contract_lifetime").get<std::uint64_t>();
    t.default_compensation = Wei{j.at("default_compensation").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("agreement terms: ") + e.what());
  }
  return t;
}

Wei default_gas_money(const GasPolicy& policy) {
  return Wei{checked_mul(checked_mul(policy.flat_call_gas, 8), policy.gas_price)};
}

nlohmann::ordered_json ContractPacket::to_json() const {
  nlohmann::ordered_json j;
  j["round"] = round;
  j["sender"] = sender.to_hex();
  j["terms"] = terms.to_json();
  j["terms_digest"] = hex_encode(terms_digest);
  j["signature"] = hex_encode(signature);
  return j;
}

bool SealedAgreement::verify(const PublicKey& requester_sign_pub, const PublicKey& provider_sign_pub) const {
  if (terms.digest() != terms_digest) {
    return false;
  }
  ByteView digest_view(terms_digest.data(), terms_digest.size());
  return crypto::verify_detached(requester_sig, digest_view, requester_sign_pub) &&
         crypto::verify_detached(provider_sig, digest_view, provider_sign_pub);
}

namespace {

void require_party(const Address& who, const AgreementTerms& terms, ErrorCode code, std::string_view action) {
  if (who != terms.requester_address && who != terms.provider_address) {
    throw Error(code, std::string(action) + ": " + who.to_hex() + " is not a party to the terms");
  }
}

ContractPacket make_packet(std::uint32_t round, const Address& sender, const KeyPair& sender_keys,
                           AgreementTerms terms) {
  ContractPacket packet;
  packet.round = round;
  packet.sender = sender;
  packet.terms = std::move(terms);
  packet.terms_digest = packet.terms.digest();
  packet.signature =
      crypto::sign_detached(sender_keys.sign, ByteView(packet.terms_digest.data(), packet.terms_digest.size()));
  return packet;
}

void verify_packet(const ContractPacket& packet, const PublicKey& sender_sign_pub) {
  if (packet.terms.digest() != packet.terms_digest) {
    fail(ErrorCode::BadSignature, "packet digest does not match its terms");
  }
  if (!crypto::verify_detached(packet.signature, ByteView(packet.terms_digest.data(), packet.terms_digest.size()),
                               sender_sign_pub)) {
    fail(ErrorCode::BadSignature, "packet signature does not verify");
  }
}

}  // namespace

ContractPacket propose(const Address& sender, const KeyPair& sender_keys, AgreementTerms terms) {
  terms.validate();
  require_party(sender, terms, ErrorCode::InvalidTerms, "propose");
  return make_packet(0, sender, sender_keys, std::move(terms));
}

ContractPacket counter(const Address& responder, const KeyPair& responder_keys, const ContractPacket& previous,
                       const PublicKey& previous_sender_sign_pub, AgreementTerms modified_terms) {
  verify_packet(previous, previous_sender_sign_pub);
  modified_terms.validate();
  require_party(responder, modified_terms, ErrorCode::InvalidTerms, "counter");
  if (previous.round >= kMaxNegotiationRounds) {
    fail(ErrorCode::RoundLimitExceeded,
         "negotiation exceeded " + std::to_string(kMaxNegotiationRounds) + " rounds");
  }
  return make_packet(previous.round + 1, responder, responder_keys, std::move(modified_terms));
}

SealedAgreement accept(const Address& acceptor, const KeyPair& acceptor_keys, const ContractPacket& packet,
                       const PublicKey& packet_sender_sign_pub) {
  verify_packet(packet, packet_sender_sign_pub);
  if (acceptor == packet.sender) {
    fail(ErrorCode::SelfAccept, "cannot accept one's own packet");
  }
  require_party(acceptor, packet.terms, ErrorCode::NotParty, "accept");
  require_party(packet.sender, packet.terms, ErrorCode::NotParty, "accept");

  crypto::Signature acceptor_sig =
      crypto::sign_detached(acceptor_keys.sign, ByteView(packet.terms_digest.data(), packet.terms_digest.size()));

  SealedAgreement sealed;
  sealed.terms = packet.terms;
  sealed.terms_digest = packet.terms_digest;
  if (acceptor == packet.terms.requester_address) {
    sealed.requester_sig = acceptor_sig;
    sealed.provider_sig = packet.signature;
  } else {
    sealed.provider_sig = acceptor_sig;
    sealed.requester_sig = packet.signature;
  }
  return sealed;
}

}  // namespace datapact
