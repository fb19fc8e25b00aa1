// chaindrop command line: run scenarios, validate/inspect ledgers, and
// demonstrate tamper detection.
//
// Exit codes: 0 ok, 1 chain invalid, 2 bad input/schema, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chaindrop/chain.hpp"
#include "chaindrop/simnet.hpp"

namespace {

using namespace chaindrop;

constexpr int kExitOk = 0;
constexpr int kExitInvalidChain = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& scenario_path, std::optional<int64_t> seed,
            const std::string& out_dir) {
  Scenario scenario;
  try {
    scenario = load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error loading " << scenario_path << ": " << e.what() << "\n";
    return kExitBadInput;
  }
  if (seed) scenario.config.seed = static_cast<uint64_t>(*seed);
  try {
    const RunArtifacts art = run_simulation(scenario, out_dir);
    std::cout << art.metrics.csv_header() << "\n" << art.metrics.csv_row() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_validate(const std::string& ledger_path) {
  Chain chain;
  try {
    chain = read_ledger_file(ledger_path);
  } catch (const std::exception& e) {
    std::cerr << "error reading " << ledger_path << ": " << e.what() << "\n";
    return kExitBadInput;
  }
  const Directory dir = directory_from_chain(chain);
  const ValidationReport report = validate_chain(chain, dir);
  if (report.valid) {
    std::cout << "VALID height=" << chain.height() << "\n";
    return kExitOk;
  }
  std::cout << "INVALID at=" << *report.first_bad_index
            << " reason=" << validation_failure_name(*report.reason) << "\n";
  return kExitInvalidChain;
}

int cmd_tamper(const std::string& ledger_path, int64_t block_index,
               const std::string& field, const std::string& value) {
  Chain chain;
  try {
    chain = read_ledger_file(ledger_path);
  } catch (const std::exception& e) {
    std::cerr << "error reading " << ledger_path << ": " << e.what() << "\n";
    return kExitBadInput;
  }
  if (block_index <= 0 || block_index > chain.height()) {
    std::cerr << "block index out of range (genesis cannot be tampered here)\n";
    return kExitBadInput;
  }
  Json j = chain.blocks[static_cast<size_t>(block_index)].to_json();
  if (field == "timestamp" || field == "index") {
    try {
      j[field] = std::stoll(value);
    } catch (const std::exception&) {
      std::cerr << "field " << field << " needs an integer value\n";
      return kExitBadInput;
    }
  } else if (field == "prev_hash" || field == "sealer" || field == "hash") {
    j[field] = value;
  } else {
    std::cerr << "not a mutable scalar field: " << field << "\n";
    return kExitBadInput;
  }
  const std::string out_path = ledger_path + ".tampered";
  std::ofstream out(out_path, std::ios::binary);
  for (int64_t i = 0; i <= chain.height(); ++i) {
    if (i == block_index)
      out << canonical_serialize(j) << "\n";
    else
      out << canonical_serialize(chain.blocks[static_cast<size_t>(i)].to_json())
          << "\n";
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& ledger_path, std::optional<int64_t> block,
                std::optional<std::string> order) {
  Chain chain;
  try {
    chain = read_ledger_file(ledger_path);
  } catch (const std::exception& e) {
    std::cerr << "error reading " << ledger_path << ": " << e.what() << "\n";
    return kExitBadInput;
  }
  if (block) {
    if (*block < 0 || *block > chain.height()) {
      std::cerr << "no such block: " << *block << "\n";
      return kExitBadInput;
    }
    std::cout << canonical_serialize(
                     chain.blocks[static_cast<size_t>(*block)].to_json())
              << "\n";
    return kExitOk;
  }

  // full tx history of one suborder, chain order, with resulting states
  const Directory dir = directory_from_chain(chain);
  ContractState state;
  bool found = false;
  for (const auto& blk : chain.blocks) {
    for (const auto& tx : blk.txs) {
      state.apply_transaction(tx, dir);
      if (!tx.payload.contains("suborder_id")) continue;
      if (tx.payload["suborder_id"].get<std::string>() != *order) continue;
      found = true;
      auto it = state.suborders.find(*order);
      const std::string st =
          it == state.suborders.end() ? "?" : order_state_name(it->second.state);
      std::cout << "block=" << blk.index << " t=" << tx.created_at << " "
                << tx_kind_name(tx.kind) << " author=" << tx.author
                << " state=" << st << "\n";
    }
  }
  if (!found) {
    std::cerr << "no such suborder: " << *order << "\n";
    return kExitBadInput;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blockchain-backed delivery marketplace simulator"};
  app.require_subcommand(1);

  std::string scenario_path, ledger_path, out_dir = "./out";
  std::optional<int64_t> seed;
  int64_t tamper_block = -1;
  std::string tamper_field, tamper_value;
  std::optional<int64_t> inspect_block;
  std::optional<std::string> inspect_order;

  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate", "validate a ledger file");
  validate->add_option("ledger", ledger_path, "ledger.jsonl file")->required();

  auto* tamper = app.add_subcommand("tamper", "write a tampered copy of a ledger");
  tamper->add_option("ledger", ledger_path)->required();
  tamper->add_option("--block", tamper_block, "block index (>= 1)")->required();
  tamper->add_option("--field", tamper_field, "scalar field name")->required();
  tamper->add_option("--value", tamper_value, "replacement value")->required();

  auto* inspect = app.add_subcommand("inspect", "print a block or an order history");
  inspect->add_option("ledger", ledger_path)->required();
  inspect->add_option("--block", inspect_block, "block index");
  inspect->add_option("--order", inspect_order, "suborder id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadInput;
  }

  if (run->parsed()) return cmd_run(scenario_path, seed, out_dir);
  if (validate->parsed()) return cmd_validate(ledger_path);
  if (tamper->parsed())
    return cmd_tamper(ledger_path, tamper_block, tamper_field, tamper_value);
  if (inspect->parsed()) {
    if (!inspect_block && !inspect_order) {
      std::cerr << "inspect needs --block or --order\n";
      return kExitBadInput;
    }
    return cmd_inspect(ledger_path, inspect_block, inspect_order);
  }
  return kExitBadInput;
}
