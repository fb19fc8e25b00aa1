#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaindrop/directory.hpp"
#include "chaindrop/geo.hpp"
#include "chaindrop/tx.hpp"

namespace chaindrop {

using Money = int64_t;

enum class OrderState { Placed, Accepted, HandedOver, Delivered, Finalized, Expired };

inline const char* order_state_name(OrderState s) {
  switch (s) {
    case OrderState::Placed: return "Placed";
    case OrderState::Accepted: return "Accepted";
    case OrderState::HandedOver: return "HandedOver";
    case OrderState::Delivered: return "Delivered";
    case OrderState::Finalized: return "Finalized";
    case OrderState::Expired: return "Expired";
  }
  return "?";
}

struct OrderItem {
  std::string product_id;
  int64_t quantity = 1;
};

struct Bill {
  std::string suborder_id;
  GeoPoint pickup;
  std::string pickup_label;
  GeoPoint delivery;
  std::string delivery_label;
  SimSeconds order_date = 0;
  SimSeconds handover_date = 0;
  SimSeconds delivery_date = 0;
  Money items_cost = 0;
  Money shipping_fee = 0;
  Money total = 0;

  Json to_json() const {
    Json j;
    j["suborder_id"] = suborder_id;
    j["pickup"] = {{"lat_e6", pickup.lat_e6}, {"lon_e6", pickup.lon_e6}, {"label", pickup_label}};
    j["delivery"] = {{"lat_e6", delivery.lat_e6}, {"lon_e6", delivery.lon_e6}, {"label", delivery_label}};
    j["order_date"] = order_date;
    j["handover_date"] = handover_date;
    j["delivery_date"] = delivery_date;
    j["items_cost"] = items_cost;
    j["shipping_fee"] = shipping_fee;
    j["total"] = total;
    return j;
  }

  static Bill from_json(const Json& j) {
    Bill b;
    b.suborder_id = j.at("suborder_id").get<std::string>();
    b.pickup = {j.at("pickup").at("lat_e6").get<int64_t>(), j.at("pickup").at("lon_e6").get<int64_t>()};
    b.pickup_label = j.at("pickup").at("label").get<std::string>();
    b.delivery = {j.at("delivery").at("lat_e6").get<int64_t>(), j.at("delivery").at("lon_e6").get<int64_t>()};
    b.delivery_label = j.at("delivery").at("label").get<std::string>();
    b.order_date = j.at("order_date").get<SimSeconds>();
    b.handover_date = j.at("handover_date").get<SimSeconds>();
    b.delivery_date = j.at("delivery_date").get<SimSeconds>();
    b.items_cost = j.at("items_cost").get<Money>();
    b.shipping_fee = j.at("shipping_fee").get<Money>();
    b.total = j.at("total").get<Money>();
    return b;
  }
};

struct SubOrder {
  std::string suborder_id;
  std::string parent_order_id;
  AccountId consumer;
  AccountId vendor;
  std::vector<OrderItem> items;
  Money items_cost = 0;
  Money shipping_fee = 0;
  OrderState state = OrderState::Placed;
  SimSeconds placed_at = 0;
  int64_t ttl_s = 0;
  std::optional<AccountId> assigned_carrier;
  std::optional<Bill> bill;
  SimSeconds accepted_at = 0;
  SimSeconds handover_at = 0;
  SimSeconds delivered_at = 0;

  Money total() const { return items_cost + shipping_fee; }
  SimSeconds expires_at() const { return placed_at + ttl_s; }
};

struct BalanceBook {
  std::map<AccountId, Money> balances;
  std::map<std::string, Money> escrow;

  Money total() const {
    Money t = 0;
    for (const auto& [_, v] : balances) t += v;
    for (const auto& [_, v] : escrow) t += v;
    return t;
  }
};

struct ContractEvent {
  SimSeconds time = 0;
  std::string kind;
  std::string suborder_id;
  std::string detail;
};

// Escrow that does not match the suborder total means the engine itself is
// broken; the run aborts rather than limping on.
struct EscrowMismatch : std::runtime_error {
  explicit EscrowMismatch(const std::string& suborder_id)
      : std::runtime_error("escrow mismatch for " + suborder_id) {}
};

struct ContractAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadDates : std::runtime_error {
  BadDates() : std::runtime_error("bill dates out of order") {}
};

enum class ApplyError { InvalidTransition, Unauthorized, UnknownSubOrder };

inline const char* apply_error_name(ApplyError e) {
  switch (e) {
    case ApplyError::InvalidTransition: return "InvalidTransition";
    case ApplyError::Unauthorized: return "Unauthorized";
    case ApplyError::UnknownSubOrder: return "UnknownSubOrder";
  }
  return "?";
}

struct ApplyResult {
  std::optional<ApplyError> error;
  std::vector<ContractEvent> events;

  bool ok() const { return !error.has_value(); }
};

inline Bill make_bill(const SubOrder& so, SimSeconds handover_date,
                      SimSeconds delivery_date, const GeoPoint& vendor_loc,
                      const GeoPoint& consumer_loc) {
  if (!(so.placed_at <= handover_date && handover_date <= delivery_date))
    throw BadDates();
  Bill b;
  b.suborder_id = so.suborder_id;
  b.pickup = vendor_loc;
  b.pickup_label = so.vendor;
  b.delivery = consumer_loc;
  b.delivery_label = so.consumer;
  b.order_date = so.placed_at;
  b.handover_date = handover_date;
  b.delivery_date = delivery_date;
  b.items_cost = so.items_cost;
  b.shipping_fee = so.shipping_fee;
  b.total = so.items_cost + so.shipping_fee;
  return b;
}

inline void settle_payment(BalanceBook& book, const SubOrder& so) {
  auto it = book.escrow.find(so.suborder_id);
  if (it == book.escrow.end() || it->second != so.total())
    throw EscrowMismatch(so.suborder_id);
  book.balances[so.vendor] += so.items_cost;
  book.balances[*so.assigned_carrier] += so.shipping_fee;
  book.escrow.erase(it);
}

// Replayable order-lifecycle state. Applying a chain's transactions in
// order to a fresh ContractState reproduces the run; the chain is the
// source of truth.
class ContractState {
 public:
  std::map<std::string, SubOrder> suborders;
  BalanceBook book;

  ApplyResult apply_transaction(const TxEnvelope& tx, const Directory& directory) {
    switch (tx.kind) {
      case TxKind::Register:
        return apply_register(tx);
      case TxKind::OrderPlaced:
        return apply_placed(tx);
      case TxKind::OrderAccepted:
        return apply_accepted(tx, directory);
      case TxKind::ProducerHandover:
        return apply_handover(tx);
      case TxKind::Delivery:
        return apply_delivery(tx);
      case TxKind::CustomerFinalize:
        return apply_finalize(tx);
      case TxKind::OrderExpired:
        return apply_expired(tx, directory);
      case TxKind::Review:
        return apply_review(tx);
    }
    return fail(ApplyError::InvalidTransition);
  }

 private:
  static ApplyResult fail(ApplyError e) { return {e, {}}; }

  ApplyResult apply_register(const TxEnvelope& tx) {
    if (tx.payload.contains("balance"))
      book.balances[tx.author] += tx.payload["balance"].get<Money>();
    return {std::nullopt,
            {{tx.created_at, "registered", "-", tx.author}}};
  }

  ApplyResult apply_placed(const TxEnvelope& tx) {
    const std::string id = tx.payload.at("suborder_id").get<std::string>();
    if (suborders.count(id)) return fail(ApplyError::InvalidTransition);
    if (tx.payload.at("consumer").get<std::string>() != tx.author)
      return fail(ApplyError::Unauthorized);
    SubOrder so;
    so.suborder_id = id;
    so.parent_order_id = tx.payload.at("parent_order_id").get<std::string>();
    so.consumer = tx.author;
    so.vendor = tx.payload.at("vendor").get<std::string>();
    for (const auto& it : tx.payload.at("items"))
      so.items.push_back({it.at("product_id").get<std::string>(),
                          it.at("quantity").get<int64_t>()});
    so.items_cost = tx.payload.at("items_cost").get<Money>();
    so.shipping_fee = tx.payload.at("shipping_fee").get<Money>();
    so.state = OrderState::Placed;
    so.placed_at = tx.created_at;
    so.ttl_s = tx.payload.at("ttl_s").get<int64_t>();
    const Money total = so.total();
    auto& bal = book.balances[so.consumer];
    if (bal < total)
      throw ContractAbort("insufficient balance on chain for " + id);
    bal -= total;
    book.escrow[id] = total;
    suborders.emplace(id, std::move(so));
    return {std::nullopt, {{tx.created_at, "placed", id, tx.author}}};
  }

  ApplyResult apply_accepted(const TxEnvelope& tx, const Directory& directory) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::Placed) return fail(ApplyError::InvalidTransition);
    const DirectoryEntry* e = directory.find(tx.author);
    if (!e || e->role != Role::Carrier) return fail(ApplyError::Unauthorized);
    so->state = OrderState::Accepted;
    so->assigned_carrier = tx.author;
    so->accepted_at = tx.created_at;
    return {std::nullopt, {{tx.created_at, "accepted", so->suborder_id, tx.author}}};
  }

  ApplyResult apply_handover(const TxEnvelope& tx) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::Accepted) return fail(ApplyError::InvalidTransition);
    if (tx.author != so->vendor) return fail(ApplyError::Unauthorized);
    so->state = OrderState::HandedOver;
    so->handover_at = tx.created_at;
    return {std::nullopt, {{tx.created_at, "handover", so->suborder_id, tx.author}}};
  }

  ApplyResult apply_delivery(const TxEnvelope& tx) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::HandedOver) return fail(ApplyError::InvalidTransition);
    if (!so->assigned_carrier || tx.author != *so->assigned_carrier)
      return fail(ApplyError::Unauthorized);
    so->bill = Bill::from_json(tx.payload.at("bill"));
    so->state = OrderState::Delivered;
    so->delivered_at = tx.created_at;
    settle_payment(book, *so);
    return {std::nullopt,
            {{tx.created_at, "delivered", so->suborder_id, tx.author},
             {tx.created_at, "settled", so->suborder_id,
              so->vendor + "+" + std::to_string(so->items_cost) + " " +
                  *so->assigned_carrier + "+" + std::to_string(so->shipping_fee)}}};
  }

  ApplyResult apply_finalize(const TxEnvelope& tx) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::Delivered) return fail(ApplyError::InvalidTransition);
    if (tx.author != so->consumer) return fail(ApplyError::Unauthorized);
    so->state = OrderState::Finalized;
    return {std::nullopt,
            {{tx.created_at, "finalized", so->suborder_id, tx.author},
             {tx.created_at, "email", so->suborder_id,
              "confirmation to " + so->consumer}}};
  }

  ApplyResult apply_expired(const TxEnvelope& tx, const Directory& directory) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::Placed) return fail(ApplyError::InvalidTransition);
    const DirectoryEntry* e = directory.find(tx.author);
    if (!e || e->role != Role::System) return fail(ApplyError::Unauthorized);
    auto it = book.escrow.find(so->suborder_id);
    if (it == book.escrow.end() || it->second != so->total())
      throw EscrowMismatch(so->suborder_id);
    book.balances[so->consumer] += it->second;
    book.escrow.erase(it);
    so->state = OrderState::Expired;
    return {std::nullopt,
            {{tx.created_at, "expired", so->suborder_id, "refund " +
              std::to_string(so->total()) + " to " + so->consumer}}};
  }

  ApplyResult apply_review(const TxEnvelope& tx) {
    auto* so = find(tx);
    if (!so) return fail(ApplyError::UnknownSubOrder);
    if (so->state != OrderState::Finalized) return fail(ApplyError::InvalidTransition);
    if (tx.author != so->consumer) return fail(ApplyError::Unauthorized);
    return {std::nullopt,
            {{tx.created_at, "review", so->suborder_id,
              tx.payload.value("ratee", "") + " " +
                  std::to_string(tx.payload.value("stars", 0))}}};
  }

  SubOrder* find(const TxEnvelope& tx) {
    if (!tx.payload.contains("suborder_id")) return nullptr;
    auto it = suborders.find(tx.payload["suborder_id"].get<std::string>());
    return it == suborders.end() ? nullptr : &it->second;
  }
};

}  // namespace chaindrop
