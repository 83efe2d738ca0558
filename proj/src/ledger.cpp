#include "datapact/ledger.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace datapact {

std::string Address::to_hex() const {
  return "0x" + hex_encode(bytes);
}

Address Address::from_hex(std::string_view hex) {
  if (hex.size() != 42 || hex.substr(0, 2) != "0x") {
    fail(ErrorCode::ParseError, "address must be 0x + 40 hex digits");
  }
  Bytes raw = hex_decode(hex.substr(2));
  Address out;
  std::copy(raw.begin(), raw.end(), out.bytes.begin());
  if (out.to_hex() != hex) {
    fail(ErrorCode::ParseError, "address hex must be lowercase");
  }
  return out;
}

Wei operator+(Wei a, Wei b) {
  if (a.amount > std::numeric_limits<std::uint64_t>::max() - b.amount) {
    fail(ErrorCode::Overflow, "wei addition overflow");
  }
  return Wei{a.amount + b.amount};
}

Wei operator-(Wei a, Wei b) {
  if (b.amount > a.amount) {
    fail(ErrorCode::Overflow, "wei subtraction underflow");
  }
  return Wei{a.amount - b.amount};
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
    fail(ErrorCode::Overflow, "multiplication overflow");
  }
  return a * b;
}

void GasPolicy::validate() const {
  if (block_gas_limit == 0) {
    fail(ErrorCode::ParseError, "block_gas_limit must be positive");
  }
  if (flat_call_gas >= block_gas_limit || transfer_gas >= block_gas_limit) {
    fail(ErrorCode::ParseError, "per-operation gas cost must be below block_gas_limit");
  }
}

GasPolicy GasPolicy::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    fail(ErrorCode::ParseError, "gas policy must be a JSON object");
  }
  GasPolicy policy;
  for (const auto& [key, value] : j.items()) {
    bool non_negative =
        value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
    if (!non_negative) {
      fail(ErrorCode::ParseError, "gas policy value for '" + key + "' must be a non-negative integer");
    }
    if (key == "block_gas_limit") {
      policy.block_gas_limit = value.get<std::uint64_t>();
    } else if (key == "flat_call_gas") {
      policy.flat_call_gas = value.get<std::uint64_t>();
    } else if (key == "transfer_gas") {
      policy.transfer_gas = value.get<std::uint64_t>();
    } else if (key == "gas_price") {
      policy.gas_price = value.get<std::uint64_t>();
    } else {
      fail(ErrorCode::ParseError, "unknown gas policy key '" + key + "'");
    }
  }
  policy.validate();
  return policy;
}

GasPolicy GasPolicy::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open gas policy file " + file.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("gas policy parse error: ") + e.what());
  }
  return from_json(j);
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Provider: return "provider";
    case Role::Requester: return "requester";
    case Role::Arbiter: return "arbiter";
    case Role::Cloud: return "cloud";
    case Role::Miner: return "miner";
    case Role::Contract: return "contract";
  }
  return "unknown";
}

Role role_from_name(std::string_view name) {
  for (Role r : {Role::Provider, Role::Requester, Role::Arbiter, Role::Cloud, Role::Miner, Role::Contract}) {
    if (role_name(r) == name) return r;
  }
  throw Error(ErrorCode::ParseError, "unknown role '" + std::string(name) + "'");
}

namespace {

// Unambiguous length-prefixed text form used inside hash preimages.
void append_netstring(std::string& out, std::string_view s) {
  out += std::to_string(s.size());
  out += ':';
  out.append(s.begin(), s.end());
}

}  // namespace

Digest EventRecord::compute_hash(std::uint64_t seq, std::uint64_t logical_time, const Address& emitter,
                                 std::string_view kind, const std::map<std::string, std::string>& payload,
                                 const Digest& prev_hash) {
  // Canonical preimage: seq \n time \n emitter \n kind \n payload \n prev.
  // Payload entries are iterated in key order (std::map) and written as
  // netstring(key)=netstring(value); so the encoding is injective.
  std::string preimage;
  preimage += std::to_string(seq);
  preimage += '\n';
  preimage += std::to_string(logical_time);
  preimage += '\n';
  preimage += emitter.to_hex();
  preimage += '\n';
  append_netstring(preimage, kind);
  preimage += '\n';
  for (const auto& [key, value] : payload) {
    append_netstring(preimage, key);
    preimage += '=';
    append_netstring(preimage, value);
    preimage += ';';
  }
  preimage += '\n';
  preimage += hex_encode(prev_hash);
  return crypto::sha256(to_bytes(preimage));
}

nlohmann::ordered_json EventRecord::to_json() const {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["logical_time"] = logical_time;
  j["emitter"] = emitter.to_hex();
  j["kind"] = kind;
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [key, value] : payload) {
    p[key] = value;
  }
  j["payload"] = std::move(p);
  j["prev_hash"] = hex_encode(prev_hash);
  j["this_hash"] = hex_encode(this_hash);
  return j;
}

std::string EventRecord::to_json_line() const {
  return to_json().dump();
}

namespace {

Digest digest_from_lower_hex(const nlohmann::json& j, const char* field) {
  if (!j.is_string()) {
    fail(ErrorCode::ParseError, std::string(field) + " must be a string");
  }
  const std::string s = j.get<std::string>();
  Bytes raw = hex_decode(s);
  if (raw.size() != 32 || hex_encode(raw) != s) {
    fail(ErrorCode::ParseError, std::string(field) + " must be 64 lowercase hex digits");
  }
  Digest d{};
  std::copy(raw.begin(), raw.end(), d.begin());
  return d;
}

std::uint64_t u64_field(const nlohmann::json& j, const char* field) {
  if (!j.is_number_unsigned()) {
    fail(ErrorCode::ParseError, std::string(field) + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

}  // namespace

EventRecord EventRecord::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 7) {
    fail(ErrorCode::ParseError, "event record must be an object with exactly 7 fields");
  }
  for (const char* field : {"seq", "logical_time", "emitter", "kind", "payload", "prev_hash", "this_hash"}) {
    if (!j.contains(field)) {
      fail(ErrorCode::ParseError, std::string("event record missing field ") + field);
    }
  }
  EventRecord rec;
  rec.seq = u64_field(j.at("seq"), "seq");
  rec.logical_time = u64_field(j.at("logical_time"), "logical_time");
  if (!j.at("emitter").is_string()) {
    fail(ErrorCode::ParseError, "emitter must be a string");
  }
  rec.emitter = Address::from_hex(j.at("emitter").get<std::string>());
  if (!j.at("kind").is_string()) {
    fail(ErrorCode::ParseError, "kind must be a string");
  }
  rec.kind = j.at("kind").get<std::string>();
  if (!j.at("payload").is_object()) {
    fail(ErrorCode::ParseError, "payload must be an object");
  }
  for (const auto& [key, value] : j.at("payload").items()) {
    if (!value.is_string()) {
      fail(ErrorCode::ParseError, "payload values must be strings");
    }
    rec.payload[key] = value.get<std::string>();
  }
  if (rec.payload.size() != j.at("payload").size()) {
    fail(ErrorCode::ParseError, "payload has duplicate keys");
  }
  rec.prev_hash = digest_from_lower_hex(j.at("prev_hash"), "prev_hash");
  rec.this_hash = digest_from_lower_hex(j.at("this_hash"), "this_hash");
  return rec;
}

Ledger::Ledger(std::uint64_t seed, GasPolicy policy) : policy_(policy), rng_(seed) {
  policy_.validate();
  std::lock_guard lock(mu_);
  Address miner = fresh_address();
  Account miner_account;
  miner_account.address = miner;
  miner_account.role = Role::Miner;
  accounts_.emplace(miner, miner_account);
  miner_ = miner;
  append_event_unlocked(miner, "CREATION", {{"role", "miner"}, {"balance", "0"}});
}

Ledger::Ledger(const Ledger& other)
    : policy_(other.policy_),
      rng_(0),
      accounts_(),
      log_(),
      clock_(0),
      miner_(),
      minted_() {
  std::lock_guard lock(other.mu_);
  rng_ = other.rng_;
  accounts_ = other.accounts_;
  log_ = other.log_;
  clock_ = other.clock_;
  miner_ = other.miner_;
  minted_ = other.minted_;
}

Address Ledger::fresh_address() {
  while (true) {
    Address addr;
    rng_.fill(addr.bytes.data(), addr.bytes.size());
    if (!accounts_.contains(addr)) {
      return addr;
    }
  }
}

Account& Ledger::require_account(const Address& addr) {
  auto it = accounts_.find(addr);
  if (it == accounts_.end()) {
    fail(ErrorCode::UnknownAddress, "no account " + addr.to_hex());
  }
  return it->second;
}

const Account& Ledger::require_account(const Address& addr) const {
  auto it = accounts_.find(addr);
  if (it == accounts_.end()) {
    fail(ErrorCode::UnknownAddress, "no account " + addr.to_hex());
  }
  return it->second;
}

Account& Ledger::require_live_recipient(const Address& addr) {
  Account& acct = require_account(addr);
  if (acct.destroyed) {
    fail(ErrorCode::AlreadyDestroyed, "contract " + addr.to_hex() + " is destroyed");
  }
  return acct;
}

Address Ledger::create_account(Wei initial_balance, Role role) {
  std::lock_guard lock(mu_);
  Address addr = fresh_address();
  Account account;
  account.address = addr;
  account.balance = initial_balance;
  account.role = role;
  accounts_.emplace(addr, account);
  minted_ = minted_ + initial_balance;
  append_event_unlocked(addr, "CREATION",
                        {{"role", std::string(role_name(role))},
                         {"balance", std::to_string(initial_balance.amount)}});
  return addr;
}

bool Ledger::account_exists(const Address& addr) const {
  std::lock_guard lock(mu_);
  return accounts_.contains(addr);
}

const Account& Ledger::account(const Address& addr) const {
  std::lock_guard lock(mu_);
  return require_account(addr);
}

Wei Ledger::balance_of(const Address& addr) const {
  std::lock_guard lock(mu_);
  return require_account(addr).balance;
}

Wei Ledger::total_balance() const {
  std::lock_guard lock(mu_);
  Wei total;
  for (const auto& [addr, acct] : accounts_) {
    total = total + acct.balance;
  }
  return total;
}

std::vector<Address> Ledger::accounts() const {
  std::lock_guard lock(mu_);
  std::vector<Address> out;
  out.reserve(accounts_.size());
  for (const auto& [addr, acct] : accounts_) {
    out.push_back(addr);
  }
  return out;
}

void Ledger::charge_gas_unlocked(const Address& payer, std::uint64_t gas_units) {
  Wei cost{checked_mul(gas_units, policy_.gas_price)};
  Account& from = require_account(payer);
  from.balance = from.balance - cost;
  accounts_.at(miner_).balance = accounts_.at(miner_).balance + cost;
}

TransferReceipt Ledger::transfer(const Address& from, const Address& to, Wei amount) {
  std::lock_guard lock(mu_);
  Account& src = require_account(from);
  require_live_recipient(to);
  Wei gas_cost{checked_mul(policy_.transfer_gas, policy_.gas_price)};
  if (src.balance < amount + gas_cost) {
    fail(ErrorCode::InsufficientBalance,
         from.to_hex() + " holds " + std::to_string(src.balance.amount) + " wei, needs " +
             std::to_string((amount + gas_cost).amount));
  }
  src.balance = src.balance - amount - gas_cost;
  accounts_.at(to).balance = accounts_.at(to).balance + amount;
  accounts_.at(miner_).balance = accounts_.at(miner_).balance + gas_cost;
  append_event_unlocked(from, "TRANSFER",
                        {{"from", from.to_hex()},
                         {"to", to.to_hex()},
                         {"amount", std::to_string(amount.amount)},
                         {"gas", std::to_string(policy_.transfer_gas)}});
  return TransferReceipt{amount, policy_.transfer_gas};
}

std::uint64_t Ledger::charge_call_gas(const Address& caller, const Address& contract, std::string_view what) {
  std::lock_guard lock(mu_);
  Account& src = require_account(caller);
  Wei cost{checked_mul(policy_.flat_call_gas, policy_.gas_price)};
  if (src.balance < cost) {
    fail(ErrorCode::InsufficientBalance, caller.to_hex() + " cannot pay call gas");
  }
  charge_gas_unlocked(caller, policy_.flat_call_gas);
  append_event_unlocked(caller, "CALL_GAS",
                        {{"contract", contract.to_hex()},
                         {"gas", std::to_string(policy_.flat_call_gas)},
                         {"what", std::string(what)}});
  return policy_.flat_call_gas;
}

void Ledger::escrow_deposit(const Address& from, const Address& contract, Wei amount, std::string_view what) {
  std::lock_guard lock(mu_);
  Account& src = require_account(from);
  Account& dst = require_live_recipient(contract);
  if (dst.role != Role::Contract) {
    fail(ErrorCode::UnknownContract, contract.to_hex() + " is not a contract");
  }
  if (src.balance < amount) {
    fail(ErrorCode::InsufficientBalance, from.to_hex() + " cannot fund escrow");
  }
  src.balance = src.balance - amount;
  dst.balance = dst.balance + amount;
  append_event_unlocked(from, "ESCROW_DEPOSIT",
                        {{"contract", contract.to_hex()},
                         {"amount", std::to_string(amount.amount)},
                         {"what", std::string(what)}});
}

void Ledger::escrow_payout(const Address& contract, const Address& to, Wei amount, std::string_view what) {
  std::lock_guard lock(mu_);
  Account& src = require_live_recipient(contract);
  if (src.role != Role::Contract) {
    fail(ErrorCode::UnknownContract, contract.to_hex() + " is not a contract");
  }
  Account& dst = require_live_recipient(to);
  if (src.balance < amount) {
    fail(ErrorCode::InsufficientBalance, "contract escrow cannot cover payout");
  }
  src.balance = src.balance - amount;
  dst.balance = dst.balance + amount;
  append_event_unlocked(contract, "ESCROW_PAYOUT",
                        {{"contract", contract.to_hex()},
                         {"to", to.to_hex()},
                         {"amount", std::to_string(amount.amount)},
                         {"what", std::string(what)}});
}

DeployReceipt Ledger::deploy_contract(const Address& owner, std::string_view kind, std::uint64_t declared_gas,
                                      std::uint64_t gas_limit) {
  std::lock_guard lock(mu_);
  Account& src = require_account(owner);
  if (gas_limit > policy_.block_gas_limit) {
    // The network never accepts the transaction; nothing is charged.
    fail(ErrorCode::BlockGasLimitExceeded,
         "gas limit " + std::to_string(gas_limit) + " exceeds block gas limit " +
             std::to_string(policy_.block_gas_limit));
  }
  Wei limit_cost{checked_mul(gas_limit, policy_.gas_price)};
  if (src.balance < limit_cost) {
    fail(ErrorCode::InsufficientBalance, owner.to_hex() + " cannot cover the gas limit");
  }
  if (declared_gas > gas_limit) {
    // A failed attempt is charged the full limit.
    charge_gas_unlocked(owner, gas_limit);
    append_event_unlocked(owner, "DEPLOY_FAILED",
                          {{"kind", std::string(kind)},
                           {"reason", "OutOfGas"},
                           {"declared_gas", std::to_string(declared_gas)},
                           {"gas_charged", std::to_string(gas_limit)}});
    fail(ErrorCode::OutOfGas, "declared gas " + std::to_string(declared_gas) + " exceeds gas limit " +
                                  std::to_string(gas_limit));
  }
  charge_gas_unlocked(owner, declared_gas);
  Address addr = fresh_address();
  Account contract;
  contract.address = addr;
  contract.role = Role::Contract;
  contract.contract_kind = std::string(kind);
  accounts_.emplace(addr, contract);
  append_event_unlocked(owner, "DEPLOY",
                        {{"contract", addr.to_hex()},
                         {"kind", std::string(kind)},
                         {"declared_gas", std::to_string(declared_gas)},
                         {"gas_limit", std::to_string(gas_limit)}});
  return DeployReceipt{addr, declared_gas};
}

bool Ledger::contract_live(const Address& addr) const {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(addr);
  return it != accounts_.end() && it->second.role == Role::Contract && !it->second.destroyed;
}

void Ledger::self_destruct(const Address& contract, const std::vector<std::pair<Address, Wei>>& refunds) {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(contract);
  if (it == accounts_.end() || it->second.role != Role::Contract) {
    fail(ErrorCode::UnknownContract, "no contract at " + contract.to_hex());
  }
  if (it->second.destroyed) {
    fail(ErrorCode::AlreadyDestroyed, contract.to_hex() + " already destroyed");
  }
  Wei sum;
  for (const auto& [to, amount] : refunds) {
    require_live_recipient(to);
    sum = sum + amount;
  }
  if (sum != it->second.balance) {
    fail(ErrorCode::RefundMismatch, "refunds total " + std::to_string(sum.amount) + ", escrow holds " +
                                        std::to_string(it->second.balance.amount));
  }
  for (const auto& [to, amount] : refunds) {
    accounts_.at(to).balance = accounts_.at(to).balance + amount;
  }
  it->second.balance = Wei{0};
  it->second.destroyed = true;
  append_event_unlocked(contract, "DESTRUCT",
                        {{"contract", contract.to_hex()},
                         {"refunds", std::to_string(refunds.size())},
                         {"total", std::to_string(sum.amount)}});
}

std::uint64_t Ledger::advance_time(std::uint64_t delta) {
  std::lock_guard lock(mu_);
  clock_ += delta;
  return clock_;
}

std::uint64_t Ledger::now() const {
  std::lock_guard lock(mu_);
  return clock_;
}

const EventRecord& Ledger::append_event_unlocked(const Address& emitter, std::string kind,
                                                 std::map<std::string, std::string> payload) {
  EventRecord rec;
  rec.seq = log_.size();
  rec.logical_time = clock_;
  rec.emitter = emitter;
  rec.kind = std::move(kind);
  rec.payload = std::move(payload);
  rec.prev_hash = log_.empty() ? Digest{} : log_.back().this_hash;
  rec.this_hash = EventRecord::compute_hash(rec.seq, rec.logical_time, rec.emitter, rec.kind, rec.payload,
                                            rec.prev_hash);
  log_.push_back(std::move(rec));
  return log_.back();
}

const EventRecord& Ledger::append_event(const Address& emitter, std::string kind,
                                        std::map<std::string, std::string> payload) {
  std::lock_guard lock(mu_);
  require_account(emitter);
  return append_event_unlocked(emitter, std::move(kind), std::move(payload));
}

std::vector<EventRecord> Ledger::query_log(const LogFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<EventRecord> out;
  for (const EventRecord& rec : log_) {
    if (filter.emitter && rec.emitter != *filter.emitter) continue;
    if (filter.kind && rec.kind != *filter.kind) continue;
    if (filter.contract) {
      auto it = rec.payload.find("contract");
      if (it == rec.payload.end() || it->second != filter.contract->to_hex()) continue;
    }
    if (filter.time_range &&
        (rec.logical_time < filter.time_range->first || rec.logical_time > filter.time_range->second)) {
      continue;
    }
    out.push_back(rec);
  }
  return out;
}

namespace {

ChainVerification check_records(const std::vector<EventRecord>& records) {
  Digest expected_prev{};
  std::uint64_t last_time = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const EventRecord& rec = records[i];
    if (rec.seq != i) {
      return {false, i, "seq mismatch: expected " + std::to_string(i)};
    }
    if (rec.prev_hash != expected_prev) {
      return {false, i, "chain broken: prev_hash does not match preceding record"};
    }
    if (rec.logical_time < last_time) {
      return {false, i, "logical_time regression"};
    }
    Digest recomputed = EventRecord::compute_hash(rec.seq, rec.logical_time, rec.emitter, rec.kind,
                                                  rec.payload, rec.prev_hash);
    if (recomputed != rec.this_hash) {
      return {false, i, "this_hash does not match record contents"};
    }
    expected_prev = rec.this_hash;
    last_time = rec.logical_time;
  }
  return {true, records.size(), ""};
}

}  // namespace

ChainVerification Ledger::verify_chain() const {
  std::lock_guard lock(mu_);
  return check_records(log_);
}

void Ledger::export_log(std::ostream& out) const {
  std::lock_guard lock(mu_);
  for (const EventRecord& rec : log_) {
    out << rec.to_json_line() << '\n';
  }
}

void Ledger::export_log(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoError, "cannot open " + file.string() + " for writing");
  }
  export_log(out);
  if (!out) {
    fail(ErrorCode::IoError, "write failure on " + file.string());
  }
}

ChainVerification Ledger::verify_log_lines(std::istream& in) {
  std::vector<EventRecord> records;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      records.push_back(EventRecord::from_json(j));
    } catch (const nlohmann::json::exception& e) {
      return {false, index, std::string("record does not parse: ") + e.what()};
    } catch (const Error& e) {
      return {false, index, std::string("record invalid: ") + e.what()};
    }
    ++index;
  }
  return check_records(records);
}

ChainVerification Ledger::verify_log_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open " + file.string());
  }
  return verify_log_lines(in);
}

}  // namespace datapact
