#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "datapact/datashare.hpp"
#include "datapact/ledger.hpp"

namespace datapact {

// Deployment gas for a vote contract, linear in the panel size between the
// measured endpoints 2181014 (1 voter) and 2183669 (10 voters).
std::uint64_t congress_deploy_gas(std::size_t voter_count);

enum class Ballot { Yes, No };
enum class VotePhase { Open, Tallied };

struct Decision {
  bool breach_confirmed = false;
  std::optional<Address> violator;  // the accuser's counterparty when confirmed
  std::uint32_t yes_count = 0;
  std::uint32_t no_count = 0;
  std::uint32_t cast_count = 0;

  nlohmann::ordered_json to_json() const;
};

// Arbiter ballot box with deadline, quorum, and margin. Lives on the ledger as
// a zero-balance contract; destroys itself once its decision is dispatched.
class VoteContract {
 public:
  VoteContract(Ledger& ledger, Address address, DataShareContract* parent, Address accuser,
               std::vector<Address> arbiters, std::uint64_t deadline, Wei compensation,
               std::string description);

  const Address& address() const { return address_; }
  const std::vector<Address>& arbiters() const { return arbiters_; }
  std::uint64_t deadline() const { return deadline_; }
  Wei compensation() const { return compensation_; }
  const std::string& description() const { return description_; }
  VotePhase phase() const { return phase_; }
  bool executed() const { return executed_; }
  const Address& accuser() const { return accuser_; }
  const std::optional<Decision>& decision() const { return decision_; }

  void cast_vote(const Address& arbiter, Ballot ballot, std::uint64_t now);
  const Decision& tally(std::uint64_t now, std::uint32_t quorum, double margin);
  void execute_decision();

  nlohmann::ordered_json snapshot() const;

 private:
  Ledger& ledger_;
  Address address_;
  DataShareContract* parent_;
  Address accuser_;
  std::vector<Address> arbiters_;
  std::uint64_t deadline_;
  Wei compensation_;
  std::string description_;
  std::map<Address, Ballot> ballots_;
  VotePhase phase_ = VotePhase::Open;
  std::optional<Decision> decision_;
  bool executed_ = false;
};

// Spawns vote contracts on behalf of data-share contracts; the accuser funds
// the deployment ("an initial fee in terms of gas").
class CongressFactory {
 public:
  explicit CongressFactory(Ledger& ledger) : ledger_(ledger) {}

  std::shared_ptr<VoteContract> spawn_vote(DataShareContract& parent, const Address& accuser,
                                           const std::vector<Address>& arbiters, std::uint64_t voting_time,
                                           Wei compensation, const std::string& description);

 private:
  Ledger& ledger_;
};

}  // namespace datapact
