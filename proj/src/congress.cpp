#include "datapact/congress.hpp"

#include <algorithm>
#include <set>

namespace datapact {

std::uint64_t congress_deploy_gas(std::size_t voter_count) {
  if (voter_count < 1) {
    fail(ErrorCode::InvalidRange, "voter count must be at least 1");
  }
  // 2181014 at 1 voter, exactly 295 per additional voter.
  return 2181014 + checked_mul(voter_count - 1, 295);
}

nlohmann::ordered_json Decision::to_json() const {
  nlohmann::ordered_json j;
  j["breach_confirmed"] = breach_confirmed;
  if (violator) {
    j["violator"] = violator->to_hex();
  }
  j["yes_count"] = yes_count;
  j["no_count"] = no_count;
  j["cast_count"] = cast_count;
  return j;
}

VoteContract::VoteContract(Ledger& ledger, Address address, DataShareContract* parent, Address accuser,
                           std::vector<Address> arbiters, std::uint64_t deadline, Wei compensation,
                           std::string description)
    : ledger_(ledger),
      address_(address),
      parent_(parent),
      accuser_(accuser),
      arbiters_(std::move(arbiters)),
      deadline_(deadline),
      compensation_(compensation),
      description_(std::move(description)) {}

void VoteContract::cast_vote(const Address& arbiter, Ballot ballot, std::uint64_t now) {
  if (phase_ != VotePhase::Open) {
    fail(ErrorCode::WrongPhase, "ballots are only accepted while the vote is open");
  }
  if (std::find(arbiters_.begin(), arbiters_.end(), arbiter) == arbiters_.end()) {
    fail(ErrorCode::NotArbiter, arbiter.to_hex() + " is not on the panel");
  }
  if (ballots_.contains(arbiter)) {
    fail(ErrorCode::AlreadyVoted, arbiter.to_hex() + " already voted");
  }
  if (now >= deadline_) {
    fail(ErrorCode::VotingClosed, "the voting deadline has passed");
  }
  Wei flat{checked_mul(ledger_.policy().flat_call_gas, ledger_.policy().gas_price)};
  if (ledger_.balance_of(arbiter) < flat) {
    fail(ErrorCode::InsufficientBalance, "arbiter cannot cover call gas");
  }
  ledger_.charge_call_gas(arbiter, address_, "cast_vote");
  ballots_.emplace(arbiter, ballot);
  ledger_.append_event(address_, "BALLOT",
                       {{"contract", address_.to_hex()},
                        {"arbiter", arbiter.to_hex()},
                        {"ballot", ballot == Ballot::Yes ? "yes" : "no"}});
}

const Decision& VoteContract::tally(std::uint64_t now, std::uint32_t quorum, double margin) {
  if (phase_ != VotePhase::Open) {
    fail(ErrorCode::WrongPhase, "vote already tallied");
  }
  if (now < deadline_) {
    fail(ErrorCode::DeadlineNotReached, "voting is open until " + std::to_string(deadline_));
  }
  Decision d;
  for (const auto& [arbiter, ballot] : ballots_) {
    if (ballot == Ballot::Yes) {
      ++d.yes_count;
    } else {
      ++d.no_count;
    }
  }
  d.cast_count = d.yes_count + d.no_count;
  // Quorum failure and ties favor the accused: strict margin on cast votes.
  d.breach_confirmed =
      d.cast_count >= quorum && static_cast<double>(d.yes_count) > margin * static_cast<double>(d.cast_count);
  if (d.breach_confirmed) {
    const AgreementTerms& terms = parent_->terms();
    d.violator =
        (accuser_ == terms.requester_address) ? terms.provider_address : terms.requester_address;
  }
  decision_ = d;
  phase_ = VotePhase::Tallied;
  ledger_.append_event(address_, "DECISION",
                       {{"contract", address_.to_hex()},
                        {"decision", d.breach_confirmed ? "breach_confirmed" : "no_breach"},
                        {"yes", std::to_string(d.yes_count)},
                        {"no", std::to_string(d.no_count)},
                        {"cast", std::to_string(d.cast_count)}});
  return *decision_;
}

void VoteContract::execute_decision() {
  if (executed_) {
    fail(ErrorCode::AlreadyExecuted, "decision already executed");
  }
  if (phase_ != VotePhase::Tallied) {
    fail(ErrorCode::WrongPhase, "tally the vote before executing its decision");
  }
  if (decision_->breach_confirmed) {
    parent_->apply_penalty(accuser_, *decision_->violator, compensation_);
  }
  // A rejected accusation moves nothing; the spawn fee stays spent.
  parent_->vote_executed(*decision_);
  executed_ = true;
  ledger_.self_destruct(address_, {});
}

nlohmann::ordered_json VoteContract::snapshot() const {
  nlohmann::ordered_json j;
  j["address"] = address_.to_hex();
  j["accuser"] = accuser_.to_hex();
  j["deadline"] = deadline_;
  j["compensation"] = compensation_.amount;
  j["description"] = description_;
  j["phase"] = phase_ == VotePhase::Open ? "open" : "tallied";
  j["executed"] = executed_;
  j["ballots"] = nlohmann::ordered_json::array();
  for (const auto& [arbiter, ballot] : ballots_) {
    j["ballots"].push_back(
        {{"arbiter", arbiter.to_hex()}, {"ballot", ballot == Ballot::Yes ? "yes" : "no"}});
  }
  if (decision_) {
    j["decision"] = decision_->to_json();
  }
  return j;
}

std::shared_ptr<VoteContract> CongressFactory::spawn_vote(DataShareContract& parent, const Address& accuser,
                                                          const std::vector<Address>& arbiters,
                                                          std::uint64_t voting_time, Wei compensation,
                                                          const std::string& description) {
  if (parent.state() == ShareState::Closed) {
    fail(ErrorCode::AlreadyClosed, "parent contract is closed");
  }
  if (parent.active_vote()) {
    fail(ErrorCode::VoteInProgress, "parent already has an open vote");
  }
  if (arbiters.empty()) {
    fail(ErrorCode::EmptyPanel, "arbiter panel is empty");
  }
  const AgreementTerms& terms = parent.terms();
  if (accuser != terms.requester_address && accuser != terms.provider_address) {
    fail(ErrorCode::NotParty, accuser.to_hex() + " is not a party to the parent agreement");
  }
  std::set<Address> seen;
  for (const Address& arbiter : arbiters) {
    if (!seen.insert(arbiter).second) {
      fail(ErrorCode::InvalidTerms, "duplicate arbiter " + arbiter.to_hex());
    }
    if (arbiter == terms.requester_address || arbiter == terms.provider_address) {
      fail(ErrorCode::ConflictedArbiter, arbiter.to_hex() + " is a party to the agreement");
    }
  }
  if (compensation > ledger_.balance_of(parent.address())) {
    fail(ErrorCode::CompensationExceedsEscrow,
         "compensation " + std::to_string(compensation.amount) + " exceeds remaining escrow");
  }

  std::uint64_t deploy_gas = congress_deploy_gas(arbiters.size());
  DeployReceipt receipt = ledger_.deploy_contract(accuser, "Congress", deploy_gas, deploy_gas);

  std::uint64_t deadline = ledger_.now() + voting_time;
  auto vote = std::make_shared<VoteContract>(ledger_, receipt.address, &parent, accuser, arbiters, deadline,
                                             compensation, description);
  parent.note_vote_spawned(accuser, description, compensation, receipt.address);
  for (const Address& arbiter : arbiters) {
    ledger_.append_event(receipt.address, "VOTE_REQUEST",
                         {{"contract", receipt.address.to_hex()},
                          {"arbiter", arbiter.to_hex()},
                          {"parent", parent.address().to_hex()},
                          {"deadline", std::to_string(deadline)}});
  }
  return vote;
}

}  // namespace datapact
