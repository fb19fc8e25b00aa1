#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaindrop/canonical.hpp"
#include "chaindrop/geo.hpp"

namespace chaindrop {

using AccountId = std::string;
using SimSeconds = int64_t;

enum class Role { Consumer, Carrier, Producer, System };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Consumer: return "Consumer";
    case Role::Carrier: return "Carrier";
    case Role::Producer: return "Producer";
    case Role::System: return "System";
  }
  return "?";
}

inline std::optional<Role> role_from_name(const std::string& s) {
  if (s == "Consumer") return Role::Consumer;
  if (s == "Carrier") return Role::Carrier;
  if (s == "Producer") return Role::Producer;
  if (s == "System") return Role::System;
  return std::nullopt;
}

// Carriers never seal; everyone else does.
inline bool role_seals(Role r) { return r != Role::Carrier; }

inline bool valid_account_id(const AccountId& id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

// Per-account MAC secrets are derived, not stored, so a validator that only
// has the ledger file can rebuild the directory from Register transactions.
inline std::string derive_secret(const AccountId& id) {
  const std::string hex = sha256_hex("chaindrop-account-secret:" + id);
  std::string raw;
  raw.reserve(32);
  for (size_t i = 0; i < 64; i += 2) {
    auto nib = [&](char c) -> int {
      return c <= '9' ? c - '0' : c - 'a' + 10;
    };
    raw.push_back(static_cast<char>((nib(hex[i]) << 4) | nib(hex[i + 1])));
  }
  return raw;
}

struct DirectoryEntry {
  AccountId account;
  Role role = Role::Consumer;
  std::string secret;  // 32 raw bytes, never serialized
  bool is_sealer = false;
  SimSeconds registered_at = 0;
  std::optional<GeoPoint> home_location;
};

struct UnknownAccount : std::runtime_error {
  explicit UnknownAccount(const AccountId& id)
      : std::runtime_error("unknown account: " + id) {}
};

struct DuplicateAccount : std::runtime_error {
  explicit DuplicateAccount(const AccountId& id)
      : std::runtime_error("account already registered: " + id) {}
};

class Directory {
 public:
  const DirectoryEntry& register_account(const AccountId& id, Role role,
                                         SimSeconds at,
                                         std::optional<GeoPoint> home = {}) {
    if (!valid_account_id(id))
      throw std::invalid_argument("bad account id: " + id);
    if (entries_.count(id)) throw DuplicateAccount(id);
    DirectoryEntry e;
    e.account = id;
    e.role = role;
    e.secret = derive_secret(id);
    e.is_sealer = role_seals(role);
    e.registered_at = at;
    e.home_location = home;
    return entries_.emplace(id, std::move(e)).first->second;
  }

  bool contains(const AccountId& id) const { return entries_.count(id) > 0; }

  const DirectoryEntry& at(const AccountId& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw UnknownAccount(id);
    return it->second;
  }

  const DirectoryEntry* find(const AccountId& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Registration-ordered sealer set; ties on time break by account id.
  std::vector<AccountId> sealers() const {
    std::vector<const DirectoryEntry*> s;
    for (const auto& [_, e] : entries_)
      if (e.is_sealer) s.push_back(&e);
    std::sort(s.begin(), s.end(), [](const auto* a, const auto* b) {
      return std::tie(a->registered_at, a->account) <
             std::tie(b->registered_at, b->account);
    });
    std::vector<AccountId> out;
    out.reserve(s.size());
    for (const auto* e : s) out.push_back(e->account);
    return out;
  }

  const std::map<AccountId, DirectoryEntry>& entries() const {
    return entries_;
  }

 private:
  std::map<AccountId, DirectoryEntry> entries_;
};

}  // namespace chaindrop
