#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chaindrop/canonical.hpp"
#include "chaindrop/directory.hpp"
#include "chaindrop/tx.hpp"

namespace chaindrop {

inline const std::string kZeroHash(64, '0');
inline const std::string kGenesisSealer = "genesis";

struct Block {
  int64_t index = 0;
  SimSeconds timestamp = 0;
  std::string prev_hash;
  AccountId sealer;
  std::vector<TxEnvelope> txs;
  std::string hash;

  Json header_json() const {
    Json j;
    j["index"] = index;
    j["timestamp"] = timestamp;
    j["prev_hash"] = prev_hash;
    j["sealer"] = sealer;
    Json arr = Json::array();
    for (const auto& tx : txs) arr.push_back(tx.to_json());
    j["txs"] = arr;
    return j;
  }

  Json to_json() const {
    Json j = header_json();
    j["hash"] = hash;
    return j;
  }

  std::string compute_hash() const {
    return sha256_hex(canonical_serialize(header_json()));
  }

  static Block from_json(const Json& j) {
    Block b;
    b.index = j.at("index").get<int64_t>();
    b.timestamp = j.at("timestamp").get<SimSeconds>();
    b.prev_hash = j.at("prev_hash").get<std::string>();
    b.sealer = j.at("sealer").get<std::string>();
    for (const auto& t : j.at("txs")) b.txs.push_back(TxEnvelope::from_json(t));
    b.hash = j.at("hash").get<std::string>();
    return b;
  }
};

inline Block genesis_block() {
  Block g;
  g.index = 0;
  g.timestamp = 0;
  g.prev_hash = kZeroHash;
  g.sealer = kGenesisSealer;
  g.hash = g.compute_hash();
  return g;
}

struct Chain {
  std::vector<Block> blocks;

  Chain() { blocks.push_back(genesis_block()); }

  const Block& tip() const { return blocks.back(); }
  int64_t height() const { return static_cast<int64_t>(blocks.size()) - 1; }
};

struct NoSealers : std::runtime_error {
  NoSealers() : std::runtime_error("directory has no sealers") {}
};
struct BadSealerError : std::runtime_error {
  explicit BadSealerError(const AccountId& id)
      : std::runtime_error("not the next sealer: " + id) {}
};
struct BadAuthTagError : std::runtime_error {
  explicit BadAuthTagError(const std::string& tx_id)
      : std::runtime_error("tx fails authentication: " + tx_id) {}
};
struct EmptyBlockError : std::runtime_error {
  EmptyBlockError() : std::runtime_error("refusing to seal an empty block") {}
};

// Round-robin over the registration-ordered sealer set, keyed by the index
// of the block about to be sealed.
inline AccountId sealer_for_index(int64_t block_index,
                                  const Directory& directory) {
  const auto sealers = directory.sealers();
  if (sealers.empty()) throw NoSealers();
  return sealers[static_cast<size_t>(block_index) % sealers.size()];
}

inline AccountId next_sealer(const Chain& chain, const Directory& directory) {
  return sealer_for_index(chain.tip().index + 1, directory);
}

inline Block seal_block(const std::vector<TxEnvelope>& pending,
                        const Chain& chain, const AccountId& sealer,
                        SimSeconds now, const Directory& directory) {
  if (pending.empty()) throw EmptyBlockError();
  if (sealer != next_sealer(chain, directory)) throw BadSealerError(sealer);
  for (const auto& tx : pending)
    if (!verify_tx(tx, directory)) throw BadAuthTagError(tx.tx_id);
  Block b;
  b.index = chain.tip().index + 1;
  b.timestamp = now;
  b.prev_hash = chain.tip().hash;
  b.sealer = sealer;
  b.txs = pending;
  b.hash = b.compute_hash();
  return b;
}

enum class ValidationFailure {
  HashMismatch,
  LinkBroken,
  BadSealer,
  BadAuthTag,
  DuplicateTx,
  BadGenesis,
};

inline const char* validation_failure_name(ValidationFailure f) {
  switch (f) {
    case ValidationFailure::HashMismatch: return "HashMismatch";
    case ValidationFailure::LinkBroken: return "LinkBroken";
    case ValidationFailure::BadSealer: return "BadSealer";
    case ValidationFailure::BadAuthTag: return "BadAuthTag";
    case ValidationFailure::DuplicateTx: return "DuplicateTx";
    case ValidationFailure::BadGenesis: return "BadGenesis";
  }
  return "?";
}

struct ValidationReport {
  bool valid = true;
  std::optional<int64_t> first_bad_index;
  std::optional<ValidationFailure> reason;

  static ValidationReport ok() { return {}; }
  static ValidationReport fail(int64_t index, ValidationFailure why) {
    return {false, index, why};
  }
};

// A block's own hash recomputation is checked only after its successor's
// link check, so a tampered hash field surfaces as LinkBroken at the
// successor rather than masking the untouched contents.
inline ValidationReport validate_chain(const Chain& chain,
                                       const Directory& directory) {
  if (chain.blocks.empty()) return ValidationReport::fail(0, ValidationFailure::BadGenesis);
  const Block genesis = genesis_block();
  const Block& b0 = chain.blocks[0];
  if (b0.index != 0 || b0.timestamp != 0 || b0.prev_hash != kZeroHash ||
      b0.sealer != kGenesisSealer || !b0.txs.empty() || b0.hash != genesis.hash)
    return ValidationReport::fail(0, ValidationFailure::BadGenesis);

  std::set<std::string> seen_tx_ids;
  const int64_t n = static_cast<int64_t>(chain.blocks.size()) - 1;
  for (int64_t i = 1; i <= n; ++i) {
    const Block& b = chain.blocks[static_cast<size_t>(i)];
    const Block& parent = chain.blocks[static_cast<size_t>(i - 1)];
    if (b.index != i || b.prev_hash != parent.hash)
      return ValidationReport::fail(i, ValidationFailure::LinkBroken);
    AccountId expected;
    try {
      expected = sealer_for_index(i, directory);
    } catch (const NoSealers&) {
      return ValidationReport::fail(i, ValidationFailure::BadSealer);
    }
    if (b.sealer != expected)
      return ValidationReport::fail(i, ValidationFailure::BadSealer);
    for (const auto& tx : b.txs) {
      if (!verify_tx(tx, directory))
        return ValidationReport::fail(i, ValidationFailure::BadAuthTag);
      if (!seen_tx_ids.insert(tx.tx_id).second)
        return ValidationReport::fail(i, ValidationFailure::DuplicateTx);
    }
    if (i > 1) {
      const Block& prev = chain.blocks[static_cast<size_t>(i - 1)];
      if (prev.hash != prev.compute_hash())
        return ValidationReport::fail(i - 1, ValidationFailure::HashMismatch);
    }
  }
  if (n >= 1) {
    const Block& last = chain.blocks.back();
    if (last.hash != last.compute_hash())
      return ValidationReport::fail(n, ValidationFailure::HashMismatch);
  }
  return ValidationReport::ok();
}

// Rebuilds the trusted directory from Register txs, so a ledger file is
// self-contained for validation and inspection.
inline Directory directory_from_chain(const Chain& chain) {
  Directory dir;
  for (const auto& block : chain.blocks) {
    for (const auto& tx : block.txs) {
      if (tx.kind != TxKind::Register) continue;
      const auto role = role_from_name(tx.payload.value("role", ""));
      if (!role || dir.contains(tx.author)) continue;
      std::optional<GeoPoint> home;
      if (tx.payload.contains("home")) {
        home = GeoPoint{tx.payload["home"].at("lat_e6").get<int64_t>(),
                        tx.payload["home"].at("lon_e6").get<int64_t>()};
      }
      dir.register_account(tx.author, *role, tx.created_at, home);
    }
  }
  return dir;
}

// One block per line, canonical text form. Bit-exact across runs.
inline void write_ledger_file(const Chain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& block : chain.blocks)
    out << canonical_serialize(block.to_json()) << "\n";
}

struct LedgerParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Chain read_ledger_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LedgerParseError("cannot open: " + path);
  Chain chain;
  chain.blocks.clear();
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw LedgerParseError("bad ledger line " + std::to_string(lineno));
    try {
      chain.blocks.push_back(Block::from_json(j));
    } catch (const std::exception& e) {
      throw LedgerParseError("bad ledger line " + std::to_string(lineno) +
                             ": " + e.what());
    }
  }
  if (chain.blocks.empty()) throw LedgerParseError("empty ledger file");
  return chain;
}

}  // namespace chaindrop
