#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "datapact/crypto.hpp"
#include "datapact/ledger.hpp"

namespace datapact {

using crypto::KeyPair;
using crypto::PublicKey;

// The negotiated parameter set that seeds a data-share contract.
struct AgreementTerms {
  std::string requester_name;
  Address requester_address;
  std::string provider_name;
  Address provider_address;
  Wei payment;
  Wei requester_deposit;
  Wei provider_deposit;
  Wei gas_money;
  std::string breach_condition;
  std::vector<Address> voter_list;
  std::uint32_t quorum = 1;
  std::uint64_t voting_time = 0;   // seconds
  double voting_margin = 0.5;      // fraction of cast votes, (0, 1]
  std::uint64_t contract_lifetime = 0;  // seconds
  Wei default_compensation;

  void validate() const;  // throws InvalidTerms naming the violated rule

  // Fields in declaration order, strings and lists length-prefixed, integers
  // big-endian fixed-width, the margin as its IEEE-754 bit pattern.
  Bytes canonical_bytes() const;
  Digest digest() const;

  nlohmann::ordered_json to_json() const;
  static AgreementTerms from_json(const nlohmann::json& j);

  bool operator==(const AgreementTerms&) const = default;
};

// Default gas allowance: covers the happy path's contract-paid dispatches with
// headroom; scenarios override per agreement.
Wei default_gas_money(const GasPolicy& policy);

struct ContractPacket {
  std::uint32_t round = 0;
  Address sender;
  AgreementTerms terms;
  Digest terms_digest{};
  crypto::Signature signature{};

  nlohmann::ordered_json to_json() const;
};

// Terms both parties signed; the only thing the contract factory accepts.
struct SealedAgreement {
  AgreementTerms terms;
  Digest terms_digest{};
  crypto::Signature requester_sig{};
  crypto::Signature provider_sig{};

  bool verify(const PublicKey& requester_sign_pub, const PublicKey& provider_sign_pub) const;
};

inline constexpr std::uint32_t kMaxNegotiationRounds = 64;

ContractPacket propose(const Address& sender, const KeyPair& sender_keys, AgreementTerms terms);

ContractPacket counter(const Address& responder, const KeyPair& responder_keys, const ContractPacket& previous,
                       const PublicKey& previous_sender_sign_pub, AgreementTerms modified_terms);

SealedAgreement accept(const Address& acceptor, const KeyPair& acceptor_keys, const ContractPacket& packet,
                       const PublicKey& packet_sender_sign_pub);

}  // namespace datapact
