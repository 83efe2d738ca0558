#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "datapact/bytes.hpp"
#include "datapact/crypto.hpp"
#include "datapact/errors.hpp"
#include "datapact/rng.hpp"

namespace datapact {

using crypto::Digest;

// 20-byte account / contract identifier, rendered 0x + 40 lowercase hex digits.
struct Address {
  std::array<std::uint8_t, 20> bytes{};

  std::string to_hex() const;
  static Address from_hex(std::string_view hex);  // throws ParseError

  auto operator<=>(const Address&) const = default;
};

// Non-negative wei amount with checked arithmetic; overflow is an error, never wraparound.
struct Wei {
  std::uint64_t amount = 0;

  auto operator<=>(const Wei&) const = default;
};

Wei operator+(Wei a, Wei b);  // throws Overflow
Wei operator-(Wei a, Wei b);  // throws Overflow on underflow
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);

struct GasPolicy {
  std::uint64_t block_gas_limit = 4712388;
  std::uint64_t flat_call_gas = 30000;
  std::uint64_t transfer_gas = 21000;
  std::uint64_t gas_price = 1;  // wei per gas unit

  void validate() const;  // throws ParseError if inconsistent
  static GasPolicy from_json(const nlohmann::json& j);
  static GasPolicy load(const std::filesystem::path& file);
};

enum class Role { Provider, Requester, Arbiter, Cloud, Miner, Contract };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);  // throws ParseError

struct Account {
  Address address;
  Wei balance;
  Role role = Role::Provider;
  bool destroyed = false;          // contracts only
  std::string contract_kind;       // contracts only
};

// One link of the hash-chained audit log. this_hash covers
// (seq, logical_time, emitter, kind, canonical payload, prev_hash).
struct EventRecord {
  std::uint64_t seq = 0;
  std::uint64_t logical_time = 0;
  Address emitter;
  std::string kind;
  std::map<std::string, std::string> payload;
  Digest prev_hash{};
  Digest this_hash{};

  static Digest compute_hash(std::uint64_t seq, std::uint64_t logical_time, const Address& emitter,
                             std::string_view kind, const std::map<std::string, std::string>& payload,
                             const Digest& prev_hash);

  nlohmann::ordered_json to_json() const;
  std::string to_json_line() const;
  static EventRecord from_json(const nlohmann::json& j);  // throws ParseError
};

struct LogFilter {
  std::optional<Address> emitter;
  std::optional<std::string> kind;
  std::optional<Address> contract;  // matches payload["contract"]
  std::optional<std::pair<std::uint64_t, std::uint64_t>> time_range;  // inclusive
};

struct ChainVerification {
  bool valid = true;
  std::size_t first_invalid = 0;  // record index when invalid
  std::string reason;
};

struct TransferReceipt {
  Wei amount;
  std::uint64_t gas_charged = 0;
};

struct DeployReceipt {
  Address address;
  std::uint64_t gas_charged = 0;
};

// Deterministic simulated chain substrate: accounts, balances, gas accounting,
// logical time, contract registry, and the append-only hash-chained event log.
// All mutations are serialized through an internal lock (single-writer model);
// copies fork the full state for what-if exploration in tests.
class Ledger {
 public:
  explicit Ledger(std::uint64_t seed, GasPolicy policy = {});
  Ledger(const Ledger& other);
  Ledger& operator=(const Ledger&) = delete;

  const GasPolicy& policy() const { return policy_; }
  Address miner_address() const { return miner_; }

  Address create_account(Wei initial_balance, Role role);
  bool account_exists(const Address& addr) const;
  const Account& account(const Address& addr) const;  // throws UnknownAddress
  Wei balance_of(const Address& addr) const;
  Wei total_balance() const;
  Wei minted_supply() const { return minted_; }
  std::vector<Address> accounts() const;

  TransferReceipt transfer(const Address& from, const Address& to, Wei amount);

  // Flat per-call fee for party-initiated contract calls; paid to the miner.
  std::uint64_t charge_call_gas(const Address& caller, const Address& contract, std::string_view what);

  // Value moved into / out of a live contract as part of a contract call. No
  // transfer fee; callers meter gas explicitly via charge_call_gas or an
  // allowance draw.
  void escrow_deposit(const Address& from, const Address& contract, Wei amount, std::string_view what);
  void escrow_payout(const Address& contract, const Address& to, Wei amount, std::string_view what);

  DeployReceipt deploy_contract(const Address& owner, std::string_view kind, std::uint64_t declared_gas,
                                std::uint64_t gas_limit);
  bool contract_live(const Address& addr) const;
  void self_destruct(const Address& contract, const std::vector<std::pair<Address, Wei>>& refunds);

  std::uint64_t advance_time(std::uint64_t delta);
  std::uint64_t now() const;

  const EventRecord& append_event(const Address& emitter, std::string kind,
                                  std::map<std::string, std::string> payload);
  const std::vector<EventRecord>& log() const { return log_; }
  std::vector<EventRecord> query_log(const LogFilter& filter) const;
  ChainVerification verify_chain() const;

  void export_log(std::ostream& out) const;
  void export_log(const std::filesystem::path& file) const;
  static ChainVerification verify_log_lines(std::istream& in);
  static ChainVerification verify_log_file(const std::filesystem::path& file);

 private:
  Address fresh_address();
  const EventRecord& append_event_unlocked(const Address& emitter, std::string kind,
                                           std::map<std::string, std::string> payload);
  void charge_gas_unlocked(const Address& payer, std::uint64_t gas_units);
  Account& require_account(const Address& addr);
  const Account& require_account(const Address& addr) const;
  Account& require_live_recipient(const Address& addr);

  mutable std::mutex mu_;
  GasPolicy policy_;
  DeterministicRng rng_;
  std::map<Address, Account> accounts_;
  std::vector<EventRecord> log_;
  std::uint64_t clock_ = 0;
  Address miner_;
  Wei minted_;
};

}  // namespace datapact
