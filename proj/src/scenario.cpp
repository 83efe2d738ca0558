#include "datapact/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace datapact {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  fail(ErrorCode::ParseError, what);
}

std::uint64_t require_u64(const nlohmann::json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field)) {
    parse_fail(where + ": '" + field + "' must be a non-negative integer");
  }
  const nlohmann::json& v = j.at(field);
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
    parse_fail(where + ": '" + field + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string require_string(const nlohmann::json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    parse_fail(where + ": '" + field + "' must be a string");
  }
  return j.at(field).get<std::string>();
}

}  // namespace

Scenario Scenario::parse(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) {
    parse_fail("scenario must be a JSON object");
  }
  Scenario s;
  s.name = j.value("name", std::string());
  s.seed = require_u64(j, "seed", "scenario");
  if (j.contains("gas_policy")) {
    s.policy = GasPolicy::from_json(j.at("gas_policy"));
  }
  if (!j.contains("accounts") || !j.at("accounts").is_array()) {
    parse_fail("scenario: 'accounts' must be an array");
  }
  for (const auto& entry : j.at("accounts")) {
    ScenarioAccount acct;
    acct.name = require_string(entry, "name", "account");
    if (acct.name == "miner") {
      parse_fail("account name 'miner' is reserved");
    }
    acct.role = role_from_name(require_string(entry, "role", "account " + acct.name));
    acct.balance = Wei{require_u64(entry, "balance", "account " + acct.name)};
    for (const ScenarioAccount& prev : s.accounts) {
      if (prev.name == acct.name) {
        parse_fail("duplicate account name '" + acct.name + "'");
      }
    }
    s.accounts.push_back(std::move(acct));
  }
  if (j.contains("data")) {
    if (!j.at("data").is_array()) {
      parse_fail("scenario: 'data' must be an array");
    }
    for (const auto& entry : j.at("data")) {
      ScenarioData d;
      d.name = require_string(entry, "name", "data");
      int sources = int(entry.contains("text")) + int(entry.contains("hex")) + int(entry.contains("file"));
      if (sources != 1) {
        parse_fail("data '" + d.name + "' must have exactly one of text | hex | file");
      }
      if (entry.contains("text")) {
        d.bytes = to_bytes(entry.at("text").get<std::string>());
      } else if (entry.contains("hex")) {
        d.bytes = hex_decode(entry.at("hex").get<std::string>());
      } else {
        std::filesystem::path file = base_dir / entry.at("file").get<std::string>();
        std::ifstream in(file, std::ios::binary);
        if (!in) {
          fail(ErrorCode::IoError, "cannot open data file " + file.string());
        }
        d.bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      }
      s.payloads.push_back(std::move(d));
    }
  }
  if (!j.contains("steps") || !j.at("steps").is_array()) {
    parse_fail("scenario: 'steps' must be an array");
  }
  for (const auto& step : j.at("steps")) {
    if (!step.is_object() || !step.contains("op") || !step.at("op").is_string()) {
      parse_fail("every step must be an object with an 'op' string");
    }
    s.steps.push_back(step);
  }
  return s;
}

Scenario Scenario::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open scenario " + file.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
  Scenario s = parse(j, file.parent_path());
  if (s.name.empty()) {
    s.name = file.stem().string();
  }
  return s;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["status"] = failed ? "failed" : "ok";
  if (failed) {
    j["failure"] = failure;
  }
  j["initial_balances"] = nlohmann::ordered_json::object();
  for (const auto& [name, amount] : initial_balances) {
    j["initial_balances"][name] = amount;
  }
  j["final_balances"] = nlohmann::ordered_json::object();
  for (const auto& [name, amount] : final_balances) {
    j["final_balances"][name] = amount;
  }
  j["event_count"] = event_count;
  j["chain_head"] = chain_head;
  j["contract_gas"] = nlohmann::ordered_json::object();
  for (const auto& [name, amount] : contract_gas) {
    j["contract_gas"][name] = amount;
  }
  j["deployments"] = nlohmann::ordered_json::array();
  for (const DeploymentSample& d : deployments) {
    j["deployments"].push_back({{"id", d.id}, {"kind", d.kind}, {"latency_s", d.latency_s}});
  }
  j["assertions"] = nlohmann::ordered_json::array();
  for (const AssertionResult& a : assertions) {
    nlohmann::ordered_json entry = {{"step", a.step}, {"description", a.description}, {"passed", a.passed}};
    if (!a.detail.empty()) {
      entry["detail"] = a.detail;
    }
    j["assertions"].push_back(entry);
  }
  return j;
}

Address ScenarioRunner::addr(const std::string& name) const {
  auto it = addresses_.find(name);
  if (it == addresses_.end()) {
    fail(ErrorCode::StepError, "unknown account '" + name + "'");
  }
  return it->second;
}

const KeyPair& ScenarioRunner::keys(const std::string& name) const {
  auto it = keypairs_.find(name);
  if (it == keypairs_.end()) {
    fail(ErrorCode::StepError, "no key pair for '" + name + "'");
  }
  return it->second;
}

std::string ScenarioRunner::name_of(const Address& address) const {
  for (const auto& [name, a] : addresses_) {
    if (a == address) return name;
  }
  fail(ErrorCode::StepError, "address " + address.to_hex() + " is not a named account");
}

const std::shared_ptr<DataShareContract>& ScenarioRunner::get_contract(const std::string& symbol) const {
  auto it = contracts_.find(symbol);
  if (it == contracts_.end()) {
    fail(ErrorCode::StepError, "unknown contract '" + symbol + "'");
  }
  return it->second;
}

const std::shared_ptr<VoteContract>& ScenarioRunner::get_vote(const std::string& symbol) const {
  auto it = votes_.find(symbol);
  if (it == votes_.end()) {
    fail(ErrorCode::StepError, "unknown vote '" + symbol + "'");
  }
  return it->second;
}

AgreementTerms ScenarioRunner::terms_from_json(const nlohmann::json& j) const {
  AgreementTerms t;
  std::string requester = require_string(j, "requester", "terms");
  std::string provider = require_string(j, "provider", "terms");
  t.requester_name = requester;
  t.requester_address = addr(requester);
  t.provider_name = provider;
  t.provider_address = addr(provider);
  t.payment = Wei{require_u64(j, "payment", "terms")};
  t.requester_deposit = Wei{require_u64(j, "requester_deposit", "terms")};
  t.provider_deposit = Wei{require_u64(j, "provider_deposit", "terms")};
  t.gas_money = j.contains("gas_money") ? Wei{require_u64(j, "gas_money", "terms")}
                                        : default_gas_money(ledger_->policy());
  t.breach_condition = j.value("breach_condition", std::string());
  if (!j.contains("voters") || !j.at("voters").is_array()) {
    parse_fail("terms: 'voters' must be an array of account names");
  }
  for (const auto& v : j.at("voters")) {
    t.voter_list.push_back(addr(v.get<std::string>()));
  }
  t.quorum = static_cast<std::uint32_t>(require_u64(j, "quorum", "terms"));
  t.voting_time = require_u64(j, "voting_time", "terms");
  if (!j.contains("voting_margin") || !j.at("voting_margin").is_number()) {
    parse_fail("terms: 'voting_margin' must be a number");
  }
  t.voting_margin = j.at("voting_margin").get<double>();
  t.contract_lifetime = require_u64(j, "contract_lifetime", "terms");
  t.default_compensation = j.contains("default_compensation")
                               ? Wei{require_u64(j, "default_compensation", "terms")}
                               : t.requester_deposit + t.provider_deposit;
  return t;
}

namespace {

// Gas attributable to each contract, reconstructed from the audit log:
// deployment charges, per-call fees, and allowance draws.
std::map<std::string, std::uint64_t> contract_gas_from_log(const Ledger& ledger) {
  std::map<std::string, std::uint64_t> out;
  std::uint64_t price = ledger.policy().gas_price;
  for (const EventRecord& rec : ledger.log()) {
    if (rec.kind == "DEPLOY") {
      out[rec.payload.at("contract")] +=
          checked_mul(std::stoull(rec.payload.at("declared_gas")), price);
    } else if (rec.kind == "CALL_GAS") {
      out[rec.payload.at("contract")] += checked_mul(std::stoull(rec.payload.at("gas")), price);
    } else if (rec.kind == "ESCROW_PAYOUT" && rec.payload.at("what") == "dispatch_gas") {
      out[rec.payload.at("contract")] += std::stoull(rec.payload.at("amount"));
    }
  }
  return out;
}

}  // namespace

RunReport ScenarioRunner::run(const Scenario& scenario, std::optional<std::uint64_t> seed_override) {
  RunReport report;
  report.scenario = scenario.name;
  report.seed = seed_override.value_or(scenario.seed);
  report_ = &report;
  scenario_ = &scenario;

  DeterministicRng master(report.seed);
  std::uint64_t ledger_seed = master.next_u64();
  std::uint64_t cloud_seed = master.next_u64();
  latency_rng_ = std::make_unique<DeterministicRng>(master.next_u64());
  DeterministicRng key_rng(master.next_u64());

  ledger_ = std::make_unique<Ledger>(ledger_seed, scenario.policy);
  factory_ = std::make_unique<ContractFactory>(*ledger_);
  congress_ = std::make_unique<CongressFactory>(*ledger_);

  addresses_.clear();
  keypairs_.clear();
  payloads_.clear();
  sealed_terms_.clear();
  contracts_.clear();
  votes_.clear();
  handles_.clear();
  links_.clear();
  cloud_.reset();

  std::optional<Address> cloud_address;
  for (const ScenarioAccount& spec : scenario.accounts) {
    Address a = ledger_->create_account(spec.balance, spec.role);
    addresses_.emplace(spec.name, a);
    keypairs_.emplace(spec.name, crypto::generate_keypair(key_rng));
    if (spec.role == Role::Cloud && !cloud_address) {
      cloud_address = a;
    }
  }
  if (cloud_address) {
    cloud_ = std::make_unique<CloudNode>(*ledger_, *cloud_address, cloud_seed);
  }
  for (const ScenarioData& d : scenario.payloads) {
    payloads_[d.name] = d.bytes;
  }

  for (const auto& [name, address] : addresses_) {
    report.initial_balances[name] = ledger_->balance_of(address).amount;
  }
  report.initial_balances["miner"] = ledger_->balance_of(ledger_->miner_address()).amount;

  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    try {
      execute_step(scenario.steps[i], i);
    } catch (const Error& e) {
      report.failed = true;
      report.failure = "step " + std::to_string(i) + " (" +
                       scenario.steps[i].value("op", std::string()) + "): " + e.what();
      break;
    } catch (const std::exception& e) {
      report.failed = true;
      report.failure = "step " + std::to_string(i) + " (" +
                       scenario.steps[i].value("op", std::string()) + ") is malformed: " + e.what();
      break;
    }
  }

  for (const auto& [name, address] : addresses_) {
    report.final_balances[name] = ledger_->balance_of(address).amount;
  }
  report.final_balances["miner"] = ledger_->balance_of(ledger_->miner_address()).amount;
  report.event_count = ledger_->log().size();
  report.chain_head = hex_encode(ledger_->log().back().this_hash);

  auto by_address = contract_gas_from_log(*ledger_);
  std::map<std::string, std::string> symbol_by_address;
  for (const auto& [symbol, contract] : contracts_) {
    symbol_by_address[contract->address().to_hex()] = symbol;
  }
  for (const auto& [symbol, vote] : votes_) {
    symbol_by_address[vote->address().to_hex()] = symbol;
  }
  for (const auto& [address, gas] : by_address) {
    auto it = symbol_by_address.find(address);
    report.contract_gas[it != symbol_by_address.end() ? it->second : address] += gas;
  }

  if (!report.failed) {
    for (const AssertionResult& a : report.assertions) {
      if (!a.passed) {
        report.failed = true;
        report.failure = "assertion at step " + std::to_string(a.step) + " failed: " + a.description;
        break;
      }
    }
  }
  return report;
}

void ScenarioRunner::execute_step(const nlohmann::json& step, std::size_t index) {
  const std::string op = step.at("op").get<std::string>();
  const std::string expected_error = step.value("expect_error", std::string());

  auto dispatch = [&]() {
    if (op == "register") {
      if (!cloud_) fail(ErrorCode::StepError, "scenario has no cloud account");
      cloud_->register_provider(require_string(step, "name", op), addr(require_string(step, "provider", op)));
    } else if (op == "store") {
      if (!cloud_) fail(ErrorCode::StepError, "scenario has no cloud account");
      std::string id = require_string(step, "id", op);
      std::string provider = require_string(step, "provider", op);
      std::string data_name = require_string(step, "data", op);
      auto it = payloads_.find(data_name);
      if (it == payloads_.end()) fail(ErrorCode::StepError, "unknown data payload '" + data_name + "'");
      DataHandle handle = cloud_->store_data(addr(provider), it->second);
      handles_[id] = handle.handle_id + ":" + data_name;
    } else if (op == "negotiate") {
      std::string id = require_string(step, "id", op);
      std::string proposer = require_string(step, "proposer", op);
      nlohmann::json terms_json = step.at("terms");
      ContractPacket packet = propose(addr(proposer), keys(proposer), terms_from_json(terms_json));
      if (step.contains("counters")) {
        for (const auto& c : step.at("counters")) {
          std::string by = require_string(c, "by", "counter");
          if (c.contains("changes")) {
            terms_json.merge_patch(c.at("changes"));
          }
          packet = counter(addr(by), keys(by), packet, keys(name_of(packet.sender)).sign.pub,
                           terms_from_json(terms_json));
        }
      }
      std::string acceptor = require_string(step, "acceptor", op);
      sealed_terms_[id] = accept(addr(acceptor), keys(acceptor), packet, keys(name_of(packet.sender)).sign.pub);
    } else if (op == "create_contract") {
      std::string id = require_string(step, "id", op);
      std::string terms_id = require_string(step, "terms", op);
      auto it = sealed_terms_.find(terms_id);
      if (it == sealed_terms_.end()) fail(ErrorCode::StepError, "unknown terms '" + terms_id + "'");
      const SealedAgreement& sealed = it->second;
      const AgreementTerms& t = sealed.terms;
      Wei payment = step.contains("payment") ? Wei{require_u64(step, "payment", op)}
                                             : t.payment + t.requester_deposit + t.gas_money;
      auto contract = factory_->create(sealed, keys(name_of(t.requester_address)).sign.pub,
                                       keys(name_of(t.provider_address)).sign.pub, payment);
      contracts_[id] = contract;
      report_->deployments.push_back(
          {id, "DataShare", latency_model_.sample(DeployKind::DataShare, *latency_rng_)});
    } else if (op == "provider_deposit") {
      auto contract = get_contract(require_string(step, "contract", op));
      std::string by = step.contains("by") ? require_string(step, "by", op)
                                           : name_of(contract->terms().provider_address);
      Wei amount = step.contains("amount") ? Wei{require_u64(step, "amount", op)}
                                           : contract->terms().provider_deposit;
      contract->provider_deposit(addr(by), amount);
    } else if (op == "deliver") {
      auto contract = get_contract(require_string(step, "contract", op));
      std::string handle_ref = require_string(step, "handle", op);
      std::string link_symbol = require_string(step, "link", op);
      if (!cloud_) fail(ErrorCode::StepError, "scenario has no cloud account");
      auto hit = handles_.find(handle_ref);
      if (hit == handles_.end()) fail(ErrorCode::StepError, "unknown handle '" + handle_ref + "'");
      std::string handle_id = hit->second.substr(0, hit->second.find(':'));
      std::string data_name = hit->second.substr(hit->second.find(':') + 1);
      std::string provider = step.contains("by") ? require_string(step, "by", op)
                                                 : name_of(contract->terms().provider_address);
      std::string requester = name_of(contract->terms().requester_address);
      auto [link, bundle] =
          cloud_->prepare_link(addr(provider), handle_id, keys(requester).box.pub, keys(provider));
      contract->deliver_link(addr(provider), bundle);
      links_[link_symbol] = LinkInfo{link.link_id, requester, require_string(step, "contract", op), bundle,
                                     data_name};
    } else if (op == "fetch") {
      auto lit = links_.find(require_string(step, "link", op));
      if (lit == links_.end()) fail(ErrorCode::StepError, "unknown link symbol");
      LinkInfo& info = lit->second;
      std::string by = step.contains("by") ? require_string(step, "by", op) : info.requester;
      auto contract = get_contract(info.contract);
      // The requester recovers the secret link id, clicks it, and opens the
      // completed bundle.
      auto link_plain = crypto::hybrid_decrypt(info.bundle.enc_link, keys(by).box);
      if (!link_plain) {
        fail(ErrorCode::LinkDecryptFailure, "link ciphertext does not decrypt for '" + by + "'");
      }
      FetchResult fetched = cloud_->fetch(to_string(*link_plain));
      EnvelopeBundle complete = info.bundle;
      complete.data_ct = fetched.data_ct;
      complete.stored_digest = fetched.stored_digest;
      Bytes data = open_pipeline(complete, keys(by),
                                 keys(name_of(contract->terms().provider_address)).sign.pub);
      bool expect_match = step.value("expect_match", true);
      std::string reference = step.value("expect_data", info.data_name);
      auto pit = payloads_.find(reference);
      if (pit == payloads_.end()) {
        fail(ErrorCode::StepError, "unknown data payload '" + reference + "'");
      }
      bool matches = data == pit->second;
      if (matches != expect_match) {
        fail(ErrorCode::StepError, std::string("fetched data ") +
                                       (matches ? "matches" : "does not match") + " '" + reference +
                                       "', expected the opposite");
      }
    } else if (op == "confirm") {
      auto contract = get_contract(require_string(step, "contract", op));
      std::string by = step.contains("by") ? require_string(step, "by", op)
                                           : name_of(contract->terms().requester_address);
      contract->confirm_retrieval(addr(by));
    } else if (op == "advance_time") {
      ledger_->advance_time(require_u64(step, "seconds", op));
    } else if (op == "raise_breach") {
      auto contract = get_contract(require_string(step, "contract", op));
      std::string id = require_string(step, "id", op);
      std::string by = require_string(step, "by", op);
      std::optional<Wei> comp;
      if (step.contains("compensation")) {
        comp = Wei{require_u64(step, "compensation", op)};
      }
      auto vote = contract->raise_breach(addr(by), step.value("description", std::string()), comp, *congress_);
      votes_[id] = vote;
      report_->deployments.push_back(
          {id, "Congress", latency_model_.sample(DeployKind::Congress, *latency_rng_)});
    } else if (op == "cast_vote") {
      auto vote = get_vote(require_string(step, "vote", op));
      std::string arbiter = require_string(step, "arbiter", op);
      std::string ballot = require_string(step, "ballot", op);
      if (ballot != "yes" && ballot != "no") fail(ErrorCode::StepError, "ballot must be yes or no");
      vote->cast_vote(addr(arbiter), ballot == "yes" ? Ballot::Yes : Ballot::No, ledger_->now());
    } else if (op == "tally") {
      std::string id = require_string(step, "vote", op);
      auto vote = get_vote(id);
      const AgreementTerms* terms = nullptr;
      for (const auto& [symbol, contract] : contracts_) {
        if (contract->active_vote() && *contract->active_vote() == vote->address()) {
          terms = &contract->terms();
          break;
        }
      }
      if (!terms) fail(ErrorCode::StepError, "vote '" + id + "' has no active parent");
      vote->tally(ledger_->now(), terms->quorum, terms->voting_margin);
    } else if (op == "execute") {
      get_vote(require_string(step, "vote", op))->execute_decision();
    } else if (op == "mutual_destroy") {
      auto contract = get_contract(require_string(step, "contract", op));
      ByteView msg(contract->address().bytes.data(), contract->address().bytes.size());
      auto req_sig = crypto::sign_detached(keys(name_of(contract->terms().requester_address)).sign, msg);
      auto prov_sig = crypto::sign_detached(keys(name_of(contract->terms().provider_address)).sign, msg);
      contract->mutual_destroy(req_sig, prov_sig);
    } else if (op == "expire") {
      get_contract(require_string(step, "contract", op))->expire(ledger_->now());
    } else if (op == "deploy") {
      std::string owner = require_string(step, "owner", op);
      std::string kind = require_string(step, "kind", op);
      DeployReceipt receipt = ledger_->deploy_contract(addr(owner), kind,
                                                       require_u64(step, "declared_gas", op),
                                                       require_u64(step, "gas_limit", op));
      bool congress_like = kind.find("Congress") != std::string::npos;
      report_->deployments.push_back(
          {receipt.address.to_hex(), congress_like ? "Congress" : "DataShare",
           latency_model_.sample(congress_like ? DeployKind::Congress : DeployKind::DataShare,
                                 *latency_rng_)});
    } else if (op == "log_event") {
      std::map<std::string, std::string> payload;
      if (step.contains("payload")) {
        for (const auto& [k, v] : step.at("payload").items()) {
          payload[k] = v.get<std::string>();
        }
      }
      ledger_->append_event(addr(require_string(step, "emitter", op)), require_string(step, "kind", op),
                            std::move(payload));
    } else if (op == "assert") {
      run_assert(step, index);
    } else {
      fail(ErrorCode::StepError, "unknown op '" + op + "'");
    }
  };

  if (expected_error.empty()) {
    dispatch();
    return;
  }

  ErrorCode expected = error_code_from_name(expected_error);
  try {
    dispatch();
  } catch (const Error& e) {
    if (e.code() == expected) {
      report_->assertions.push_back(
          {index, op + " fails with " + expected_error, true, e.what()});
      return;
    }
    fail(ErrorCode::StepError,
         "expected " + expected_error + ", got " + std::string(error_code_name(e.code())));
  }
  fail(ErrorCode::StepError, "expected " + expected_error + ", but the step succeeded");
}

void ScenarioRunner::run_assert(const nlohmann::json& step, std::size_t index) {
  const std::string check = require_string(step, "check", "assert");
  AssertionResult result;
  result.step = index;

  auto record = [&](const std::string& description, bool passed, const std::string& detail = "") {
    result.description = description;
    result.passed = passed;
    result.detail = detail;
    report_->assertions.push_back(result);
  };

  if (check == "balance") {
    std::string account = require_string(step, "account", check);
    std::uint64_t expected = require_u64(step, "equals", check);
    std::uint64_t actual = ledger_->balance_of(account == "miner" ? ledger_->miner_address() : addr(account)).amount;
    record("balance(" + account + ") == " + std::to_string(expected), actual == expected,
           "actual " + std::to_string(actual));
  } else if (check == "balance_change") {
    std::string account = require_string(step, "account", check);
    if (!step.contains("equals") || !step.at("equals").is_number_integer()) {
      parse_fail("balance_change: 'equals' must be an integer");
    }
    std::int64_t expected = step.at("equals").get<std::int64_t>();
    auto init_it = report_->initial_balances.find(account);
    if (init_it == report_->initial_balances.end()) {
      fail(ErrorCode::StepError, "unknown account '" + account + "'");
    }
    std::uint64_t initial = init_it->second;
    std::uint64_t actual_now =
        ledger_->balance_of(account == "miner" ? ledger_->miner_address() : addr(account)).amount;
    std::int64_t actual = static_cast<std::int64_t>(actual_now) - static_cast<std::int64_t>(initial);
    record("balance_change(" + account + ") == " + std::to_string(expected), actual == expected,
           "actual " + std::to_string(actual));
  } else if (check == "contract_state") {
    auto contract = get_contract(require_string(step, "contract", check));
    std::string expected = require_string(step, "equals", check);
    std::string actual(share_state_name(contract->state()));
    record("state(" + require_string(step, "contract", check) + ") == " + expected, actual == expected,
           "actual " + actual);
  } else if (check == "close_reason") {
    auto contract = get_contract(require_string(step, "contract", check));
    std::string expected = require_string(step, "equals", check);
    std::string actual =
        contract->close_reason() ? std::string(close_reason_name(*contract->close_reason())) : "none";
    record("close_reason == " + expected, actual == expected, "actual " + actual);
  } else if (check == "link_state") {
    const LinkInfo& info = links_.at(require_string(step, "link", check));
    std::string expected = require_string(step, "equals", check);
    std::string actual(link_state_name(cloud_->link_state(info.link_id)));
    record("link_state == " + expected, actual == expected, "actual " + actual);
  } else if (check == "decision") {
    auto vote = get_vote(require_string(step, "vote", check));
    std::string expected = require_string(step, "equals", check);
    std::string actual = "none";
    if (vote->decision()) {
      actual = vote->decision()->breach_confirmed ? "breach_confirmed" : "no_breach";
    }
    record("decision == " + expected, actual == expected, "actual " + actual);
  } else if (check == "escrow") {
    auto contract = get_contract(require_string(step, "contract", check));
    std::string field = require_string(step, "field", check);
    std::uint64_t expected = require_u64(step, "equals", check);
    EscrowView e = contract->escrow();
    std::uint64_t actual = 0;
    if (field == "payment") actual = e.payment.amount;
    else if (field == "requester_deposit") actual = e.requester_deposit.amount;
    else if (field == "gas_allowance") actual = e.gas_allowance.amount;
    else if (field == "provider_deposit") actual = e.provider_deposit.amount;
    else if (field == "requester_total") actual = e.requester_total().amount;
    else if (field == "total") actual = e.total().amount;
    else parse_fail("escrow: unknown field '" + field + "'");
    record("escrow." + field + " == " + std::to_string(expected), actual == expected,
           "actual " + std::to_string(actual));
  } else if (check == "event_count") {
    std::string kind = require_string(step, "kind", check);
    std::uint64_t expected = require_u64(step, "equals", check);
    LogFilter filter;
    filter.kind = kind;
    std::uint64_t actual = ledger_->query_log(filter).size();
    record("count(" + kind + ") == " + std::to_string(expected), actual == expected,
           "actual " + std::to_string(actual));
  } else if (check == "breach_count") {
    auto contract = get_contract(require_string(step, "contract", check));
    std::uint64_t expected = require_u64(step, "equals", check);
    std::uint64_t actual = contract->breach_history().size();
    record("breach_count == " + std::to_string(expected), actual == expected,
           "actual " + std::to_string(actual));
  } else if (check == "conservation") {
    Wei total = ledger_->total_balance();
    Wei minted = ledger_->minted_supply();
    record("conservation: total balance equals minted supply", total == minted,
           "total " + std::to_string(total.amount) + ", minted " + std::to_string(minted.amount));
  } else if (check == "chain_valid") {
    ChainVerification v = ledger_->verify_chain();
    record("audit chain verifies", v.valid, v.reason);
  } else {
    parse_fail("unknown assert check '" + check + "'");
  }
}

std::vector<SweepRow> gas_sweep(DeployKind kind, std::uint32_t voters_lo, std::uint32_t voters_hi,
                                std::uint32_t reps, std::uint64_t seed) {
  if (voters_lo < 1 || voters_lo > voters_hi || reps < 1) {
    fail(ErrorCode::InvalidRange, "voters range must satisfy 1 <= lo <= hi and reps >= 1");
  }
  LatencyModel model;
  DeterministicRng rng(seed);
  std::vector<SweepRow> rows;
  for (std::uint32_t v = voters_lo; v <= voters_hi; ++v) {
    SweepRow row;
    row.voters = v;
    row.gas = kind == DeployKind::DataShare ? datashare_deploy_gas(v) : congress_deploy_gas(v);
    for (std::uint32_t r = 0; r < reps; ++r) {
      row.latencies.push_back(model.sample(kind, rng));
    }
    row.stats = SampleStats::from(row.latencies);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "voters,gas,rep,latency_s,mean_s,var_s2,stddev_s\n";
  char buf[160];
  for (const SweepRow& row : rows) {
    for (std::size_t r = 0; r < row.latencies.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "%u,%llu,%zu,%.6f,%.6f,%.6f,%.6f", row.voters,
                    static_cast<unsigned long long>(row.gas), r, row.latencies[r], row.stats.mean,
                    row.stats.variance, row.stats.stddev);
      out << buf << '\n';
    }
  }
}

}  // namespace datapact
