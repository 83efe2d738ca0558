#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "datapact/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // assertion failure / invalid log
constexpr int kExitInputError = 2;

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& report_path, const std::string& log_path,
            const std::string& gas_config) {
  datapact::Scenario scenario;
  try {
    scenario = datapact::Scenario::load(scenario_path);
    if (!gas_config.empty()) {
      scenario.policy = datapact::GasPolicy::load(gas_config);
    }
  } catch (const datapact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  datapact::ScenarioRunner runner;
  datapact::RunReport report;
  try {
    report = runner.run(scenario, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  std::string rendered = report.to_json().dump(2) + "\n";

  if (report_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << report_path << "\n";
      return kExitInputError;
    }
    out << rendered;
  }
  if (!log_path.empty()) {
    try {
      runner.ledger()->export_log(std::filesystem::path(log_path));
    } catch (const datapact::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInputError;
    }
  }
  if (!report.ok()) {
    std::cerr << "run failed: " << report.failure << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_gas_sweep(const std::string& kind_name, const std::string& voters, std::uint32_t reps,
                  std::uint64_t seed, const std::string& csv_path) {
  datapact::DeployKind kind;
  if (kind_name == "datashare") {
    kind = datapact::DeployKind::DataShare;
  } else if (kind_name == "congress") {
    kind = datapact::DeployKind::Congress;
  } else {
    std::cerr << "error: --kind must be datashare or congress\n";
    return kExitInputError;
  }

  std::uint32_t lo = 0, hi = 0;
  auto sep = voters.find("..");
  try {
    if (sep == std::string::npos) {
      lo = hi = static_cast<std::uint32_t>(std::stoul(voters));
    } else {
      lo = static_cast<std::uint32_t>(std::stoul(voters.substr(0, sep)));
      hi = static_cast<std::uint32_t>(std::stoul(voters.substr(sep + 2)));
    }
  } catch (const std::exception&) {
    std::cerr << "error: --voters must be N or A..B\n";
    return kExitInputError;
  }

  std::vector<datapact::SweepRow> rows;
  try {
    rows = datapact::gas_sweep(kind, lo, hi, reps, seed);
  } catch (const datapact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  if (csv_path.empty()) {
    datapact::write_sweep_csv(rows, std::cout);
  } else {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      return kExitInputError;
    }
    datapact::write_sweep_csv(rows, out);
  }
  return kExitOk;
}

int cmd_verify_log(const std::string& path) {
  datapact::ChainVerification v;
  try {
    v = datapact::Ledger::verify_log_file(path);
  } catch (const datapact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (v.valid) {
    std::cout << "valid: " << v.first_invalid << " records\n";
    return kExitOk;
  }
  std::cout << "invalid at record " << v.first_invalid << ": " << v.reason << "\n";
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"datapact: data-sharing agreements as executable contracts on a simulated ledger"};
  app.require_subcommand(1);

  // run
  std::string scenario_path, report_path, log_path, gas_config;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--report", report_path, "write the run report to this file");
  run->add_option("--log", log_path, "export the event log (JSON Lines) to this file");
  run->add_option("--gas-config", gas_config, "gas policy JSON file overriding the scenario's policy");

  // gas-sweep
  std::string kind = "datashare", voters = "1..10", csv_path;
  std::uint32_t reps = 5;
  std::uint64_t sweep_seed = 1;
  auto* sweep = app.add_subcommand("gas-sweep", "deployment gas and latency across voter counts");
  sweep->add_option("--kind", kind, "datashare | congress")->required();
  sweep->add_option("--voters", voters, "voter range A..B (default 1..10)");
  sweep->add_option("--reps", reps, "latency repetitions per voter count (default 5)");
  sweep->add_option("--seed", sweep_seed, "latency sampler seed");
  sweep->add_option("--csv", csv_path, "write CSV to this file instead of stdout");

  // verify-log
  std::string log_file;
  auto* verify = app.add_subcommand("verify-log", "check a JSON Lines event log's hash chain");
  verify->add_option("file", log_file, "event log file")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(scenario_path, seed, report_path, log_path, gas_config);
  }
  if (sweep->parsed()) {
    return cmd_gas_sweep(kind, voters, reps, sweep_seed, csv_path);
  }
  if (verify->parsed()) {
    return cmd_verify_log(log_file);
  }
  return kExitInputError;
}
