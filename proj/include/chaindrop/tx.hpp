#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "chaindrop/canonical.hpp"
#include "chaindrop/directory.hpp"

namespace chaindrop {

enum class TxKind {
  Register,
  OrderPlaced,
  OrderAccepted,
  ProducerHandover,
  Delivery,
  CustomerFinalize,
  OrderExpired,
  Review,
};

inline const char* tx_kind_name(TxKind k) {
  switch (k) {
    case TxKind::Register: return "Register";
    case TxKind::OrderPlaced: return "OrderPlaced";
    case TxKind::OrderAccepted: return "OrderAccepted";
    case TxKind::ProducerHandover: return "ProducerHandover";
    case TxKind::Delivery: return "Delivery";
    case TxKind::CustomerFinalize: return "CustomerFinalize";
    case TxKind::OrderExpired: return "OrderExpired";
    case TxKind::Review: return "Review";
  }
  return "?";
}

inline std::optional<TxKind> tx_kind_from_name(const std::string& s) {
  static const std::map<std::string, TxKind> kMap = {
      {"Register", TxKind::Register},
      {"OrderPlaced", TxKind::OrderPlaced},
      {"OrderAccepted", TxKind::OrderAccepted},
      {"ProducerHandover", TxKind::ProducerHandover},
      {"Delivery", TxKind::Delivery},
      {"CustomerFinalize", TxKind::CustomerFinalize},
      {"OrderExpired", TxKind::OrderExpired},
      {"Review", TxKind::Review},
  };
  auto it = kMap.find(s);
  return it == kMap.end() ? std::nullopt : std::optional<TxKind>(it->second);
}

struct TxEnvelope {
  std::string tx_id;  // "<author>-<per-author sequence>"
  TxKind kind = TxKind::Register;
  AccountId author;
  SimSeconds created_at = 0;
  Json payload = Json::object();
  std::string auth_tag;  // 64 lowercase hex chars

  Json body_json() const {
    Json j;
    j["author"] = author;
    j["created_at"] = created_at;
    j["kind"] = tx_kind_name(kind);
    j["payload"] = payload;
    j["tx_id"] = tx_id;
    return j;
  }

  Json to_json() const {
    Json j = body_json();
    j["auth_tag"] = auth_tag;
    return j;
  }

  static TxEnvelope from_json(const Json& j) {
    TxEnvelope tx;
    tx.tx_id = j.at("tx_id").get<std::string>();
    auto kind = tx_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("bad tx kind");
    tx.kind = *kind;
    tx.author = j.at("author").get<std::string>();
    tx.created_at = j.at("created_at").get<SimSeconds>();
    tx.payload = j.at("payload");
    tx.auth_tag = j.at("auth_tag").get<std::string>();
    return tx;
  }
};

inline std::string compute_auth_tag(const TxEnvelope& tx,
                                    const std::string& secret) {
  return sha256_hex(secret + canonical_serialize(tx.body_json()));
}

// Fills in the MAC over everything but the tag itself.
inline TxEnvelope authenticate_tx(TxEnvelope tx, const Directory& directory) {
  tx.auth_tag = compute_auth_tag(tx, directory.at(tx.author).secret);
  return tx;
}

inline bool verify_tx(const TxEnvelope& tx, const Directory& directory) {
  const DirectoryEntry* e = directory.find(tx.author);
  if (!e) return false;
  return tx.auth_tag == compute_auth_tag(tx, e->secret);
}

// Hands out deterministic per-author sequence numbers for tx ids.
class TxFactory {
 public:
  explicit TxFactory(const Directory& directory) : directory_(&directory) {}

  TxEnvelope make(TxKind kind, const AccountId& author, SimSeconds at,
                  Json payload) {
    TxEnvelope tx;
    tx.kind = kind;
    tx.author = author;
    tx.created_at = at;
    tx.payload = std::move(payload);
    tx.tx_id = author + "-" + std::to_string(next_seq_[author]++);
    return authenticate_tx(std::move(tx), *directory_);
  }

 private:
  const Directory* directory_;
  std::map<AccountId, uint64_t> next_seq_;
};

}  // namespace chaindrop
