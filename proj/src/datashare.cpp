#include "datapact/datashare.hpp"

#include <algorithm>

#include "datapact/congress.hpp"

namespace datapact {

std::uint64_t datashare_deploy_gas(std::size_t voter_count) {
  if (voter_count < 1) {
    fail(ErrorCode::InvalidRange, "voter count must be at least 1");
  }
  // 1549929 at 1 voter, slope 195821/9 per voter, rounded to the nearest unit.
  std::uint64_t steps = checked_mul(voter_count - 1, 195821);
  std::uint64_t q = steps / 9;
  std::uint64_t r = steps % 9;
  return 1549929 + q + (r >= 5 ? 1 : 0);
}

std::string_view share_state_name(ShareState state) {
  switch (state) {
    case ShareState::Deployed: return "Deployed";
    case ShareState::ProviderBound: return "ProviderBound";
    case ShareState::LinkDelivered: return "LinkDelivered";
    case ShareState::Retrieved: return "Retrieved";
    case ShareState::Closed: return "Closed";
  }
  return "unknown";
}

std::string_view close_reason_name(CloseReason reason) {
  switch (reason) {
    case CloseReason::Expired: return "Expired";
    case CloseReason::MutualDestroy: return "MutualDestroy";
    case CloseReason::PenaltyExecuted: return "PenaltyExecuted";
  }
  return "unknown";
}

DataShareContract::DataShareContract(Ledger& ledger, Address address, SealedAgreement sealed,
                                     PublicKey requester_sign_pub, PublicKey provider_sign_pub,
                                     std::uint64_t deploy_gas)
    : ledger_(ledger),
      address_(address),
      sealed_(std::move(sealed)),
      requester_sign_pub_(requester_sign_pub),
      provider_sign_pub_(provider_sign_pub) {
  const AgreementTerms& t = sealed_.terms;
  escrow_.payment = t.payment;
  escrow_.requester_deposit = t.requester_deposit;
  escrow_.gas_allowance = t.gas_money;
  escrow_.provider_deposit = Wei{0};
  created_at_ = ledger_.now();
  expires_at_ = created_at_ + t.contract_lifetime;
  gas_consumed_ = checked_mul(deploy_gas, ledger_.policy().gas_price);
}

DataShareContract::DataShareContract(const DataShareContract& other, Ledger& ledger)
    : ledger_(ledger),
      address_(other.address_),
      sealed_(other.sealed_),
      requester_sign_pub_(other.requester_sign_pub_),
      provider_sign_pub_(other.provider_sign_pub_),
      state_(other.state_),
      close_reason_(other.close_reason_),
      escrow_(other.escrow_),
      created_at_(other.created_at_),
      expires_at_(other.expires_at_),
      active_vote_(other.active_vote_),
      breach_history_(other.breach_history_),
      link_commitment_(other.link_commitment_),
      gas_consumed_(other.gas_consumed_) {}

void DataShareContract::require_not_closed() const {
  if (state_ == ShareState::Closed) {
    fail(ErrorCode::AlreadyClosed, "contract " + address_.to_hex() + " is closed");
  }
}

void DataShareContract::provider_deposit(const Address& provider, Wei amount) {
  if (state_ != ShareState::Deployed) {
    fail(ErrorCode::WrongState, "provider deposit requires Deployed, contract is " +
                                    std::string(share_state_name(state_)));
  }
  if (provider != terms().provider_address) {
    fail(ErrorCode::NotProvider, provider.to_hex() + " is not the agreed provider");
  }
  if (amount != terms().provider_deposit) {
    fail(ErrorCode::WrongAmount, "deposit must be exactly " + std::to_string(terms().provider_deposit.amount));
  }
  Wei flat{checked_mul(ledger_.policy().flat_call_gas, ledger_.policy().gas_price)};
  if (ledger_.balance_of(provider) < amount + flat) {
    fail(ErrorCode::InsufficientBalance, "provider cannot cover deposit plus call gas");
  }
  gas_consumed_ += checked_mul(ledger_.charge_call_gas(provider, address_, "provider_deposit"),
                               ledger_.policy().gas_price);
  ledger_.escrow_deposit(provider, address_, amount, "provider_deposit");
  escrow_.provider_deposit = amount;
  state_ = ShareState::ProviderBound;
  ledger_.append_event(address_, "PROVIDER_DEPOSIT",
                       {{"contract", address_.to_hex()}, {"amount", std::to_string(amount.amount)}});
}

Wei DataShareContract::draw_dispatch_gas() {
  Wei cost{checked_mul(ledger_.policy().transfer_gas, ledger_.policy().gas_price)};
  Wei draw = std::min(cost, escrow_.gas_allowance);
  if (draw > Wei{0}) {
    escrow_.gas_allowance = escrow_.gas_allowance - draw;
    ledger_.escrow_payout(address_, ledger_.miner_address(), draw, "dispatch_gas");
    gas_consumed_ += draw.amount;
  }
  return draw;
}

void DataShareContract::deliver_link(const Address& provider, const EnvelopeBundle& bundle) {
  if (state_ != ShareState::ProviderBound) {
    fail(ErrorCode::WrongState,
         "delivery requires ProviderBound, contract is " + std::string(share_state_name(state_)));
  }
  if (provider != terms().provider_address) {
    fail(ErrorCode::NotProvider, provider.to_hex() + " is not the agreed provider");
  }
  Wei flat{checked_mul(ledger_.policy().flat_call_gas, ledger_.policy().gas_price)};
  if (ledger_.balance_of(provider) < flat) {
    fail(ErrorCode::InsufficientBalance, "provider cannot cover call gas");
  }
  gas_consumed_ +=
      checked_mul(ledger_.charge_call_gas(provider, address_, "deliver_link"), ledger_.policy().gas_price);

  link_commitment_ = crypto::sha256_hex(bundle.enc_link);
  Bytes serialized = bundle.serialize();
  ledger_.append_event(address_, "LINK_DELIVERED",
                       {{"contract", address_.to_hex()},
                        {"bundle_digest", crypto::sha256_hex(serialized)},
                        {"link_commitment", link_commitment_}});

  // The payment leaves escrow for the provider in the same call.
  if (escrow_.payment > Wei{0}) {
    Wei payment = escrow_.payment;
    escrow_.payment = Wei{0};
    ledger_.escrow_payout(address_, terms().provider_address, payment, "payment");
    draw_dispatch_gas();
  }
  state_ = ShareState::LinkDelivered;
}

void DataShareContract::confirm_retrieval(const Address& requester) {
  if (state_ != ShareState::LinkDelivered) {
    fail(ErrorCode::WrongState,
         "confirmation requires LinkDelivered, contract is " + std::string(share_state_name(state_)));
  }
  if (requester != terms().requester_address) {
    fail(ErrorCode::NotRequester, requester.to_hex() + " is not the agreed requester");
  }
  // The cloud's RETRIEVED event carries the commitment for the delivered link.
  bool consumed = false;
  LogFilter filter;
  filter.kind = "RETRIEVED";
  for (const EventRecord& rec : ledger_.query_log(filter)) {
    auto it = rec.payload.find("link_commitment");
    if (it != rec.payload.end() && it->second == link_commitment_) {
      consumed = true;
      break;
    }
  }
  if (!consumed) {
    fail(ErrorCode::LinkNotConsumed, "no retrieval recorded for the delivered link");
  }
  Wei flat{checked_mul(ledger_.policy().flat_call_gas, ledger_.policy().gas_price)};
  if (ledger_.balance_of(requester) < flat) {
    fail(ErrorCode::InsufficientBalance, "requester cannot cover call gas");
  }
  gas_consumed_ += checked_mul(ledger_.charge_call_gas(requester, address_, "confirm_retrieval"),
                               ledger_.policy().gas_price);
  state_ = ShareState::Retrieved;
  ledger_.append_event(address_, "RETRIEVAL_CONFIRMED", {{"contract", address_.to_hex()}});
}

void DataShareContract::close(CloseReason reason) {
  // Each pending nonzero refund dispatch draws transfer gas from the allowance.
  if (escrow_.requester_total() > Wei{0}) {
    draw_dispatch_gas();
  }
  if (escrow_.provider_deposit > Wei{0}) {
    draw_dispatch_gas();
  }
  std::vector<std::pair<Address, Wei>> refunds;
  Wei requester_refund = escrow_.requester_total();
  if (requester_refund > Wei{0}) {
    refunds.emplace_back(terms().requester_address, requester_refund);
  }
  if (escrow_.provider_deposit > Wei{0}) {
    refunds.emplace_back(terms().provider_address, escrow_.provider_deposit);
  }
  ledger_.self_destruct(address_, refunds);
  escrow_ = EscrowView{};
  state_ = ShareState::Closed;
  close_reason_ = reason;
  ledger_.append_event(address_, "CLOSED",
                       {{"contract", address_.to_hex()},
                        {"reason", std::string(close_reason_name(reason))}});
}

void DataShareContract::mutual_destroy(const std::optional<crypto::Signature>& requester_sig,
                                       const std::optional<crypto::Signature>& provider_sig) {
  require_not_closed();
  if (active_vote_) {
    fail(ErrorCode::VoteInProgress, "a vote is being adjudicated");
  }
  ByteView message(address_.bytes.data(), address_.bytes.size());
  if (!requester_sig || !crypto::verify_detached(*requester_sig, message, requester_sign_pub_)) {
    fail(ErrorCode::MissingSignature, "requester signature missing or invalid");
  }
  if (!provider_sig || !crypto::verify_detached(*provider_sig, message, provider_sign_pub_)) {
    fail(ErrorCode::MissingSignature, "provider signature missing or invalid");
  }
  close(CloseReason::MutualDestroy);
}

void DataShareContract::expire(std::uint64_t now) {
  require_not_closed();
  if (now < expires_at_) {
    fail(ErrorCode::NotYetExpired, "contract expires at " + std::to_string(expires_at_));
  }
  if (active_vote_) {
    fail(ErrorCode::VoteInProgress, "a vote is being adjudicated");
  }
  close(CloseReason::Expired);
}

std::shared_ptr<VoteContract> DataShareContract::raise_breach(const Address& accuser,
                                                              const std::string& description,
                                                              std::optional<Wei> compensation,
                                                              CongressFactory& congress) {
  require_not_closed();
  if (accuser != terms().requester_address && accuser != terms().provider_address) {
    fail(ErrorCode::NotParty, accuser.to_hex() + " is not a party to the agreement");
  }
  Wei comp = compensation.value_or(terms().default_compensation);
  auto vote = congress.spawn_vote(*this, accuser, terms().voter_list, terms().voting_time, comp, description);
  ledger_.append_event(address_, "BREACH_RAISED",
                       {{"contract", address_.to_hex()},
                        {"accuser", accuser.to_hex()},
                        {"vote_contract", vote->address().to_hex()},
                        {"description", description}});
  return vote;
}

void DataShareContract::note_vote_spawned(const Address& accuser, const std::string& description,
                                          Wei compensation, const Address& vote_address) {
  active_vote_ = vote_address;
  breach_history_.push_back(BreachRecord{accuser, description, compensation, vote_address, "pending"});
}

Wei DataShareContract::apply_penalty(const Address& victim, const Address& violator, Wei compensation) {
  Wei& victim_dep =
      (victim == terms().requester_address) ? escrow_.requester_deposit : escrow_.provider_deposit;
  Wei& violator_dep =
      (violator == terms().requester_address) ? escrow_.requester_deposit : escrow_.provider_deposit;

  Wei payout = std::min(compensation, victim_dep + violator_dep);
  Wei from_victim = std::min(payout, victim_dep);
  Wei from_violator = payout - from_victim;
  victim_dep = victim_dep - from_victim;
  violator_dep = violator_dep - from_violator;

  // The violator forfeits any deposit remainder: it is re-attributed to the
  // victim's escrow and comes back to them at close.
  if (violator_dep > Wei{0}) {
    Wei remainder = violator_dep;
    violator_dep = Wei{0};
    victim_dep = victim_dep + remainder;
  }

  if (payout > Wei{0}) {
    ledger_.escrow_payout(address_, victim, payout, "penalty");
    draw_dispatch_gas();
  }
  ledger_.append_event(address_, "PENALTY_PAID",
                       {{"contract", address_.to_hex()},
                        {"victim", victim.to_hex()},
                        {"violator", violator.to_hex()},
                        {"amount", std::to_string(payout.amount)}});
  // The contract itself stays open even when the penalty drained it: remaining
  // lifetime still allows further breaches, and closing stays with
  // mutual_destroy / expire.
  return payout;
}

void DataShareContract::vote_executed(const Decision& decision) {
  for (auto it = breach_history_.rbegin(); it != breach_history_.rend(); ++it) {
    if (it->decision == "pending") {
      it->decision = decision.breach_confirmed ? "breach_confirmed" : "no_breach";
      break;
    }
  }
  active_vote_.reset();
}

nlohmann::ordered_json DataShareContract::snapshot() const {
  nlohmann::ordered_json j;
  j["address"] = address_.to_hex();
  j["state"] = std::string(share_state_name(state_));
  if (close_reason_) {
    j["close_reason"] = std::string(close_reason_name(*close_reason_));
  }
  j["escrow"] = {{"payment", escrow_.payment.amount},
                 {"requester_deposit", escrow_.requester_deposit.amount},
                 {"gas_allowance", escrow_.gas_allowance.amount},
                 {"provider_deposit", escrow_.provider_deposit.amount},
                 {"requester_total", escrow_.requester_total().amount},
                 {"total", escrow_.total().amount}};
  j["created_at"] = created_at_;
  j["expires_at"] = expires_at_;
  if (active_vote_) {
    j["active_vote"] = active_vote_->to_hex();
  }
  j["breach_history"] = nlohmann::ordered_json::array();
  for (const BreachRecord& rec : breach_history_) {
    j["breach_history"].push_back({{"accuser", rec.accuser.to_hex()},
                                   {"description", rec.description},
                                   {"compensation", rec.compensation.amount},
                                   {"vote_contract", rec.vote_contract.to_hex()},
                                   {"decision", rec.decision}});
  }
  j["gas_consumed"] = gas_consumed_;
  return j;
}

std::shared_ptr<DataShareContract> ContractFactory::create(const SealedAgreement& sealed,
                                                           const PublicKey& requester_sign_pub,
                                                           const PublicKey& provider_sign_pub,
                                                           Wei requester_payment) {
  if (!sealed.verify(requester_sign_pub, provider_sign_pub)) {
    fail(ErrorCode::UnsealedTerms, "terms are not sealed by both parties");
  }
  const AgreementTerms& terms = sealed.terms;
  terms.validate();

  DepositBreakdown breakdown{terms.payment, terms.requester_deposit, terms.gas_money};
  if (requester_payment != breakdown.total()) {
    fail(ErrorCode::InsufficientDeposit,
         "requester must send payment + deposit + gas money = " + std::to_string(breakdown.total().amount) +
             ", got " + std::to_string(requester_payment.amount));
  }

  std::uint64_t deploy_gas = datashare_deploy_gas(terms.voter_list.size());
  Wei deploy_cost{checked_mul(deploy_gas, ledger_.policy().gas_price)};
  if (ledger_.balance_of(terms.requester_address) < deploy_cost + requester_payment) {
    fail(ErrorCode::InsufficientBalance, "requester cannot fund deployment and escrow");
  }

  DeployReceipt receipt = ledger_.deploy_contract(terms.requester_address, "DataShare", deploy_gas, deploy_gas);
  ledger_.escrow_deposit(terms.requester_address, receipt.address, requester_payment, "factory_create");

  auto contract = std::make_shared<DataShareContract>(ledger_, receipt.address, sealed, requester_sign_pub,
                                                      provider_sign_pub, deploy_gas);
  ledger_.append_event(receipt.address, "NOTIFY_PROVIDER",
                       {{"contract", receipt.address.to_hex()},
                        {"provider", terms.provider_address.to_hex()},
                        {"requester", terms.requester_address.to_hex()}});
  return contract;
}

}  // namespace datapact
