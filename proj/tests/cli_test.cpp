#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "chaindrop/canonical.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using chaindrop::Json;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CHAINDROP_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  CommandResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

fs::path write_minimal_scenario() {
  const fs::path p = fs::path(::testing::TempDir()) / "cli_scenario.json";
  std::ofstream out(p);
  out << chaindrop::testutil::minimal_scenario_json().dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

struct RunOutput {
  fs::path out_dir;
  fs::path ledger;
};

RunOutput fresh_run(const std::string& name, const std::string& extra = "") {
  const fs::path scenario = write_minimal_scenario();
  const fs::path out = fs::path(::testing::TempDir()) / name;
  fs::remove_all(out);
  auto r = run_cli("run " + scenario.string() + " --out " + out.string() + extra);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  return {out, out / "ledger.jsonl"};
}

}  // namespace

TEST(CliRun, HappyPathWritesThreeArtifacts) {
  auto run = fresh_run("cli_happy");
  EXPECT_TRUE(fs::exists(run.out_dir / "ledger.jsonl"));
  EXPECT_TRUE(fs::exists(run.out_dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(run.out_dir / "events.log"));
}

TEST(CliRun, MissingScenarioIsExit2) {
  auto r = run_cli("run /nonexistent/scenario.json");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("/nonexistent/scenario.json"), std::string::npos);
}

TEST(CliRun, SameSeedSameBytes) {
  auto a = fresh_run("cli_seed_a", " --seed 7");
  auto b = fresh_run("cli_seed_b", " --seed 7");
  EXPECT_EQ(chaindrop::sha256_hex(slurp(a.ledger)), chaindrop::sha256_hex(slurp(b.ledger)));
}

TEST(CliValidate, UntouchedRunIsValid) {
  auto run = fresh_run("cli_valid");
  auto r = run_cli("validate " + run.ledger.string());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("VALID height="), std::string::npos);
}

TEST(CliValidate, TruncatedFileIsExit2) {
  auto run = fresh_run("cli_trunc");
  std::string content = slurp(run.ledger);
  content.resize(content.size() - 10);  // guaranteed mid-line cut
  const fs::path bad = run.out_dir / "truncated.jsonl";
  std::ofstream(bad, std::ios::binary) << content;
  auto r = run_cli("validate " + bad.string());
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(CliTamper, TimestampTamperDetectedAtBlock) {
  auto run = fresh_run("cli_tamper_ts");
  auto t = run_cli("tamper " + run.ledger.string() +
                   " --block 1 --field timestamp --value 999");
  ASSERT_EQ(t.exit_code, 0) << t.output;
  auto v = run_cli("validate " + run.ledger.string() + ".tampered");
  EXPECT_EQ(v.exit_code, 1) << v.output;
  EXPECT_NE(v.output.find("INVALID at=1 reason=HashMismatch"), std::string::npos)
      << v.output;
}

TEST(CliTamper, GenesisIsOffLimits) {
  auto run = fresh_run("cli_tamper_genesis");
  auto t = run_cli("tamper " + run.ledger.string() +
                   " --block 0 --field timestamp --value 999");
  EXPECT_EQ(t.exit_code, 2);
}

TEST(CliTamper, HashTamperBreaksSuccessorLink) {
  auto run = fresh_run("cli_tamper_hash");
  auto t = run_cli("tamper " + run.ledger.string() +
                   " --block 1 --field hash --value " + std::string(64, '0'));
  ASSERT_EQ(t.exit_code, 0) << t.output;
  auto v = run_cli("validate " + run.ledger.string() + ".tampered");
  EXPECT_EQ(v.exit_code, 1) << v.output;
  EXPECT_NE(v.output.find("INVALID at=2 reason=LinkBroken"), std::string::npos)
      << v.output;
}

TEST(CliTamper, UnknownFieldIsExit2) {
  auto run = fresh_run("cli_tamper_field");
  auto t = run_cli("tamper " + run.ledger.string() +
                   " --block 1 --field txs --value x");
  EXPECT_EQ(t.exit_code, 2);
}

TEST(CliInspect, GenesisBlockPrintsCanonicalForm) {
  auto run = fresh_run("cli_inspect_genesis");
  auto r = run_cli("inspect " + run.ledger.string() + " --block 0");
  EXPECT_EQ(r.exit_code, 0);
  Json j = Json::parse(r.output);
  EXPECT_EQ(j.at("index"), 0);
  EXPECT_EQ(j.at("sealer"), "genesis");
  EXPECT_EQ(j.at("prev_hash"), std::string(64, '0'));
}

TEST(CliInspect, OrderHistoryShowsFiveLifecycleTxs) {
  auto run = fresh_run("cli_inspect_order");
  auto r = run_cli("inspect " + run.ledger.string() + " --order o0-0");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const std::vector<std::string> expected = {
      "OrderPlaced", "OrderAccepted", "ProducerHandover", "Delivery",
      "CustomerFinalize"};
  size_t pos = 0;
  for (const auto& kind : expected) {
    pos = r.output.find(kind, pos);
    ASSERT_NE(pos, std::string::npos) << kind << " missing:\n" << r.output;
  }
  EXPECT_NE(r.output.find("state=Finalized"), std::string::npos);
}

TEST(CliInspect, UnknownOrderIsExit2) {
  auto run = fresh_run("cli_inspect_unknown");
  auto r = run_cli("inspect " + run.ledger.string() + " --order nope");
  EXPECT_EQ(r.exit_code, 2);
}
