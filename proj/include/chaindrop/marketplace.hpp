#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chaindrop/contracts.hpp"
#include "chaindrop/geo.hpp"

namespace chaindrop {

struct Product {
  std::string product_id;
  AccountId vendor;
  std::string name;
  Money unit_price = 0;
  GeoPoint location;  // vendor pickup point
};

struct PricingConfig {
  Money base_fee = 2000;
  Money per_km_fee = 500;
  Money per_unit_fee = 100;
  int64_t offer_radius_m = 10000;
  int64_t accept_radius_m = 10500;
  int64_t location_update_period_s = 30;
  int64_t block_period_s = 15;
};

struct UnknownProduct : std::runtime_error {
  explicit UnknownProduct(const std::string& id)
      : std::runtime_error("unknown product: " + id) {}
};
struct BadQuantity : std::runtime_error {
  BadQuantity() : std::runtime_error("quantity must be >= 1") {}
};
struct BadTTL : std::runtime_error {
  BadTTL() : std::runtime_error("ttl_s must be > 0") {}
};
struct InsufficientFunds : std::runtime_error {
  explicit InsufficientFunds(const AccountId& who)
      : std::runtime_error("insufficient funds: " + who) {}
};

using Catalog = std::map<std::string, Product>;

struct VendorGroup {
  AccountId vendor;
  std::vector<OrderItem> items;
};

// Partitions an order into per-vendor groups: input order within a group,
// groups sorted by vendor id.
inline std::vector<VendorGroup> split_order(const std::vector<OrderItem>& items,
                                            const Catalog& catalog) {
  std::map<AccountId, std::vector<OrderItem>> by_vendor;
  for (const auto& item : items) {
    if (item.quantity < 1) throw BadQuantity();
    auto it = catalog.find(item.product_id);
    if (it == catalog.end()) throw UnknownProduct(item.product_id);
    by_vendor[it->second.vendor].push_back(item);
  }
  std::vector<VendorGroup> groups;
  for (auto& [vendor, group_items] : by_vendor)
    groups.push_back({vendor, std::move(group_items)});
  return groups;
}

inline Money shipping_fee(int64_t distance_m, int64_t units,
                          const PricingConfig& cfg) {
  if (units < 1) throw BadQuantity();
  const int64_t km = (distance_m + 999) / 1000;  // ceil
  return cfg.base_fee + cfg.per_km_fee * km + cfg.per_unit_fee * units;
}

struct PlacedOrder {
  std::vector<SubOrder> suborders;
  std::vector<TxEnvelope> txs;
};

// All-or-nothing intake: funds are checked against the full estimate before
// any tx is created. Pricing distance is vendor pickup -> consumer drop-off.
inline PlacedOrder place_order(const AccountId& consumer,
                               const std::string& parent_order_id,
                               const std::vector<OrderItem>& items,
                               int64_t ttl_s, SimSeconds now,
                               const Catalog& catalog,
                               const PricingConfig& cfg,
                               const GeoPoint& consumer_home,
                               const BalanceBook& book, TxFactory& factory) {
  if (ttl_s <= 0) throw BadTTL();
  const auto groups = split_order(items, catalog);

  PlacedOrder out;
  Money grand_total = 0;
  int seq = 0;
  for (const auto& group : groups) {
    SubOrder so;
    so.suborder_id = parent_order_id + "-" + std::to_string(seq++);
    so.parent_order_id = parent_order_id;
    so.consumer = consumer;
    so.vendor = group.vendor;
    so.items = group.items;
    int64_t units = 0;
    GeoPoint pickup;
    for (const auto& item : group.items) {
      const Product& p = catalog.at(item.product_id);
      so.items_cost += p.unit_price * item.quantity;
      units += item.quantity;
      pickup = p.location;
    }
    so.shipping_fee =
        shipping_fee(haversine_distance(pickup, consumer_home), units, cfg);
    so.state = OrderState::Placed;
    so.placed_at = now;
    so.ttl_s = ttl_s;
    grand_total += so.total();
    out.suborders.push_back(std::move(so));
  }

  auto bal = book.balances.find(consumer);
  if (bal == book.balances.end() || bal->second < grand_total)
    throw InsufficientFunds(consumer);

  for (const auto& so : out.suborders) {
    Json items_json = Json::array();
    for (const auto& item : so.items)
      items_json.push_back(
          {{"product_id", item.product_id}, {"quantity", item.quantity}});
    Json payload;
    payload["suborder_id"] = so.suborder_id;
    payload["parent_order_id"] = so.parent_order_id;
    payload["consumer"] = so.consumer;
    payload["vendor"] = so.vendor;
    payload["items"] = items_json;
    payload["items_cost"] = so.items_cost;
    payload["shipping_fee"] = so.shipping_fee;
    payload["ttl_s"] = so.ttl_s;
    out.txs.push_back(
        factory.make(TxKind::OrderPlaced, consumer, now, std::move(payload)));
  }
  return out;
}

// One OrderExpired tx per Placed suborder past its deadline (inclusive).
inline std::vector<TxEnvelope> expire_orders(
    const std::map<std::string, SubOrder>& suborders, SimSeconds now,
    const AccountId& system_account, TxFactory& factory) {
  std::vector<TxEnvelope> txs;
  for (const auto& [id, so] : suborders) {
    if (so.state != OrderState::Placed) continue;
    if (now < so.expires_at()) continue;
    txs.push_back(factory.make(TxKind::OrderExpired, system_account, now,
                               Json{{"suborder_id", id}}));
  }
  return txs;
}

}  // namespace chaindrop
