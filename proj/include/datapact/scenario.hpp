#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "datapact/cloud.hpp"
#include "datapact/congress.hpp"
#include "datapact/datashare.hpp"
#include "datapact/latency.hpp"
#include "datapact/ledger.hpp"

namespace datapact {

struct ScenarioAccount {
  std::string name;
  Role role = Role::Provider;
  Wei balance;
};

struct ScenarioData {
  std::string name;
  Bytes bytes;
};

// A declarative multi-party run: seeded, with every step referring to entities
// introduced by earlier steps.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  GasPolicy policy;
  std::vector<ScenarioAccount> accounts;
  std::vector<ScenarioData> payloads;
  std::vector<nlohmann::json> steps;

  static Scenario parse(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
  static Scenario load(const std::filesystem::path& file);
};

struct AssertionResult {
  std::size_t step = 0;
  std::string description;
  bool passed = false;
  std::string detail;
};

struct DeploymentSample {
  std::string id;       // scenario-local name when bound, else address
  std::string kind;     // DataShare | Congress
  double latency_s = 0.0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> initial_balances;
  std::map<std::string, std::uint64_t> final_balances;
  std::size_t event_count = 0;
  std::string chain_head;
  std::map<std::string, std::uint64_t> contract_gas;
  std::vector<DeploymentSample> deployments;
  std::vector<AssertionResult> assertions;
  bool failed = false;
  std::string failure;

  bool ok() const { return !failed; }
  nlohmann::ordered_json to_json() const;
};

// Executes a scenario against a fresh ledger. The runner owns the ledger, the
// cloud node, and every symbol the steps bind.
class ScenarioRunner {
 public:
  RunReport run(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt);

  const Ledger* ledger() const { return ledger_.get(); }

 private:
  struct LinkInfo {
    std::string link_id;
    std::string requester;  // account name
    std::string contract;   // contract symbol
    EnvelopeBundle bundle;  // wrapped_key + enc_link as handed to the requester
    std::string data_name;  // payload stored behind the handle
  };

  void execute_step(const nlohmann::json& step, std::size_t index);
  void run_assert(const nlohmann::json& step, std::size_t index);
  AgreementTerms terms_from_json(const nlohmann::json& j) const;

  Address addr(const std::string& name) const;
  const KeyPair& keys(const std::string& name) const;
  std::string name_of(const Address& address) const;
  const std::shared_ptr<DataShareContract>& get_contract(const std::string& symbol) const;
  const std::shared_ptr<VoteContract>& get_vote(const std::string& symbol) const;

  std::unique_ptr<Ledger> ledger_;
  std::unique_ptr<CloudNode> cloud_;
  std::unique_ptr<ContractFactory> factory_;
  std::unique_ptr<CongressFactory> congress_;
  std::unique_ptr<DeterministicRng> latency_rng_;
  LatencyModel latency_model_;
  const Scenario* scenario_ = nullptr;
  RunReport* report_ = nullptr;

  std::map<std::string, Address> addresses_;
  std::map<std::string, KeyPair> keypairs_;
  std::map<std::string, Bytes> payloads_;
  std::map<std::string, SealedAgreement> sealed_terms_;
  std::map<std::string, std::shared_ptr<DataShareContract>> contracts_;
  std::map<std::string, std::shared_ptr<VoteContract>> votes_;
  std::map<std::string, std::string> handles_;  // symbol -> handle_id
  std::map<std::string, LinkInfo> links_;       // symbol -> link info
};

struct SweepRow {
  std::uint32_t voters = 0;
  std::uint64_t gas = 0;
  std::vector<double> latencies;
  SampleStats stats;
};

std::vector<SweepRow> gas_sweep(DeployKind kind, std::uint32_t voters_lo, std::uint32_t voters_hi,
                                std::uint32_t reps, std::uint64_t seed);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace datapact
