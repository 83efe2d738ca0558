#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "datapact/cryptopipe.hpp"
#include "datapact/ledger.hpp"
#include "datapact/negotiation.hpp"

namespace datapact {

class CongressFactory;
class VoteContract;
struct Decision;

// Deployment gas for a data-share contract, linear in the voter count between
// the measured endpoints 1549929 (1 voter) and 1745750 (10 voters).
std::uint64_t datashare_deploy_gas(std::size_t voter_count);

struct DepositBreakdown {
  Wei payment;
  Wei deposit_money;
  Wei gas_money;

  Wei total() const { return payment + deposit_money + gas_money; }
};

enum class ShareState { Deployed, ProviderBound, LinkDelivered, Retrieved, Closed };
enum class CloseReason { Expired, MutualDestroy, PenaltyExecuted };

std::string_view share_state_name(ShareState state);
std::string_view close_reason_name(CloseReason reason);

struct BreachRecord {
  Address accuser;
  std::string description;
  Wei compensation;
  Address vote_contract;
  std::string decision = "pending";  // breach_confirmed | no_breach once executed
};

struct EscrowView {
  Wei payment;
  Wei requester_deposit;
  Wei gas_allowance;
  Wei provider_deposit;

  Wei requester_total() const { return payment + requester_deposit + gas_allowance; }
  Wei total() const { return requester_total() + provider_deposit; }
};

// Escrow state machine for one sharing agreement. All funds it controls live in
// its ledger account; the sub-account attribution here always sums to that
// balance exactly.
class DataShareContract {
 public:
  DataShareContract(Ledger& ledger, Address address, SealedAgreement sealed, PublicKey requester_sign_pub,
                    PublicKey provider_sign_pub, std::uint64_t deploy_gas);

  // Fork bound to a copied ledger; used by property harnesses.
  DataShareContract(const DataShareContract& other, Ledger& ledger);

  const Address& address() const { return address_; }
  const AgreementTerms& terms() const { return sealed_.terms; }
  ShareState state() const { return state_; }
  std::optional<CloseReason> close_reason() const { return close_reason_; }
  EscrowView escrow() const { return escrow_; }
  std::uint64_t created_at() const { return created_at_; }
  std::uint64_t expires_at() const { return expires_at_; }
  std::optional<Address> active_vote() const { return active_vote_; }
  const std::vector<BreachRecord>& breach_history() const { return breach_history_; }
  std::uint64_t gas_consumed() const { return gas_consumed_; }
  const PublicKey& requester_sign_pub() const { return requester_sign_pub_; }
  const PublicKey& provider_sign_pub() const { return provider_sign_pub_; }

  void provider_deposit(const Address& provider, Wei amount);
  void deliver_link(const Address& provider, const EnvelopeBundle& bundle);
  void confirm_retrieval(const Address& requester);
  void mutual_destroy(const std::optional<crypto::Signature>& requester_sig,
                      const std::optional<crypto::Signature>& provider_sig);
  void expire(std::uint64_t now);
  std::shared_ptr<VoteContract> raise_breach(const Address& accuser, const std::string& description,
                                             std::optional<Wei> compensation, CongressFactory& congress);

  nlohmann::ordered_json snapshot() const;

 private:
  friend class CongressFactory;
  friend class VoteContract;

  void require_not_closed() const;
  void note_vote_spawned(const Address& accuser, const std::string& description, Wei compensation,
                         const Address& vote_address);
  Wei apply_penalty(const Address& victim, const Address& violator, Wei compensation);
  void vote_executed(const Decision& decision);
  void close(CloseReason reason);
  Wei draw_dispatch_gas();

  Ledger& ledger_;
  Address address_;
  SealedAgreement sealed_;
  PublicKey requester_sign_pub_{};
  PublicKey provider_sign_pub_{};
  ShareState state_ = ShareState::Deployed;
  std::optional<CloseReason> close_reason_;
  EscrowView escrow_;
  std::uint64_t created_at_ = 0;
  std::uint64_t expires_at_ = 0;
  std::optional<Address> active_vote_;
  std::vector<BreachRecord> breach_history_;
  std::string link_commitment_;
  std::uint64_t gas_consumed_ = 0;  // wei spent on gas across this contract's operations
};

// Instantiates customized data-share contracts from sealed agreements; the
// requester funds the deployment and the full escrow breakdown in one shot.
class ContractFactory {
 public:
  explicit ContractFactory(Ledger& ledger) : ledger_(ledger) {}

  std::shared_ptr<DataShareContract> create(const SealedAgreement& sealed,
                                            const PublicKey& requester_sign_pub,
                                            const PublicKey& provider_sign_pub, Wei requester_payment);

 private:
  Ledger& ledger_;
};

}  // namespace datapact
