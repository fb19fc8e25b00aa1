#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chaindrop/canonical.hpp"
#include "chaindrop/directory.hpp"
#include "chaindrop/marketplace.hpp"

namespace chaindrop {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DanglingReference : std::runtime_error {
  explicit DanglingReference(const std::string& id)
      : std::runtime_error("dangling reference: " + id), missing_id(id) {}
  std::string missing_id;
};

struct ScenarioAccount {
  AccountId id;
  Role role = Role::Consumer;
  Money balance = 0;
  GeoPoint home;
};

struct Waypoint {
  SimSeconds time = 0;
  GeoPoint where;
};

struct AcceptAlways {};
struct AcceptNever {};
struct AcceptProbability {
  int64_t ppm = 0;  // chance per scan, parts per million
};
using AcceptPolicy = std::variant<AcceptAlways, AcceptNever, AcceptProbability>;

struct CarrierRoute {
  AccountId carrier;
  std::vector<Waypoint> waypoints;
  AcceptPolicy accept_policy = AcceptAlways{};
};

struct OrderEvent {
  SimSeconds time = 0;
  AccountId consumer;
  std::vector<OrderItem> items;
  int64_t ttl_s = 0;
};

struct SimConfig : PricingConfig {
  int64_t propagation_delay_s = 1;
  uint64_t seed = 0;
};

struct Scenario {
  SimConfig config;
  std::vector<ScenarioAccount> accounts;
  std::vector<Product> products;
  std::map<AccountId, CarrierRoute> carrier_routes;
  std::vector<OrderEvent> order_events;
  std::map<AccountId, int64_t> producer_prep_s;
  int64_t duration_s = 0;
};

namespace detail {

inline int64_t require_int(const Json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number_integer())
    throw SchemaError("missing or non-integer field: " + field);
  return j[field].get<int64_t>();
}

inline std::string require_str(const Json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_string())
    throw SchemaError("missing or non-string field: " + field);
  return j[field].get<std::string>();
}

inline GeoPoint parse_geo(const Json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_object())
    throw SchemaError("missing geo point: " + field);
  GeoPoint p{require_int(j[field], "lat_e6"), require_int(j[field], "lon_e6")};
  if (!geo_in_bounds(p)) throw SchemaError("geo point out of bounds: " + field);
  return p;
}

}  // namespace detail

inline Scenario parse_scenario(const Json& j) {
  using detail::parse_geo;
  using detail::require_int;
  using detail::require_str;

  if (!j.is_object()) throw SchemaError("scenario root must be an object");
  Scenario sc;

  if (j.contains("config")) {
    const Json& c = j["config"];
    auto opt = [&](const char* k, int64_t dflt) {
      if (!c.contains(k)) return dflt;
      if (!c[k].is_number_integer()) throw SchemaError(std::string("non-integer config field: ") + k);
      return c[k].get<int64_t>();
    };
    sc.config.base_fee = opt("base_fee", sc.config.base_fee);
    sc.config.per_km_fee = opt("per_km_fee", sc.config.per_km_fee);
    sc.config.per_unit_fee = opt("per_unit_fee", sc.config.per_unit_fee);
    sc.config.offer_radius_m = opt("offer_radius_m", sc.config.offer_radius_m);
    sc.config.accept_radius_m = opt("accept_radius_m", sc.config.accept_radius_m);
    sc.config.location_update_period_s =
        opt("location_update_period_s", sc.config.location_update_period_s);
    sc.config.block_period_s = opt("block_period_s", sc.config.block_period_s);
    sc.config.propagation_delay_s =
        opt("propagation_delay_s", sc.config.propagation_delay_s);
    sc.config.seed = static_cast<uint64_t>(opt("seed", 0));
    if (sc.config.offer_radius_m <= 0 ||
        sc.config.offer_radius_m > sc.config.accept_radius_m)
      throw SchemaError("require 0 < offer_radius_m <= accept_radius_m");
    if (sc.config.base_fee < 0 || sc.config.per_km_fee < 0 ||
        sc.config.per_unit_fee < 0)
      throw SchemaError("fees must be >= 0");
    if (sc.config.location_update_period_s <= 0 || sc.config.block_period_s <= 0 ||
        sc.config.propagation_delay_s < 0)
      throw SchemaError("bad period in config");
  }

  sc.duration_s = require_int(j, "duration_s");
  if (sc.duration_s <= 0) throw SchemaError("duration_s must be > 0");

  std::map<AccountId, Role> roles;
  if (!j.contains("accounts") || !j["accounts"].is_array())
    throw SchemaError("accounts must be an array");
  for (const Json& a : j["accounts"]) {
    ScenarioAccount acc;
    acc.id = require_str(a, "id");
    if (!valid_account_id(acc.id)) throw SchemaError("bad account id: " + acc.id);
    const auto role = role_from_name(require_str(a, "role"));
    if (!role || *role == Role::System)
      throw SchemaError("bad role for account " + acc.id);
    acc.role = *role;
    acc.balance = require_int(a, "balance");
    if (acc.balance < 0) throw SchemaError("negative balance: " + acc.id);
    acc.home = parse_geo(a, "home");
    if (roles.count(acc.id)) throw SchemaError("duplicate account: " + acc.id);
    roles[acc.id] = acc.role;
    sc.accounts.push_back(std::move(acc));
  }

  if (j.contains("products")) {
    if (!j["products"].is_array()) throw SchemaError("products must be an array");
    std::map<std::string, bool> seen;
    for (const Json& p : j["products"]) {
      Product prod;
      prod.product_id = require_str(p, "product_id");
      prod.vendor = require_str(p, "vendor");
      prod.name = p.value("name", prod.product_id);
      prod.unit_price = require_int(p, "unit_price");
      if (prod.unit_price < 0) throw SchemaError("negative unit_price: " + prod.product_id);
      prod.location = parse_geo(p, "location");
      auto it = roles.find(prod.vendor);
      if (it == roles.end()) throw DanglingReference(prod.vendor);
      if (it->second != Role::Producer)
        throw SchemaError("product vendor is not a Producer: " + prod.vendor);
      if (seen[prod.product_id]) throw SchemaError("duplicate product: " + prod.product_id);
      seen[prod.product_id] = true;
      sc.products.push_back(std::move(prod));
    }
  }

  if (j.contains("carrier_routes")) {
    if (!j["carrier_routes"].is_object())
      throw SchemaError("carrier_routes must be an object");
    for (const auto& [carrier, r] : j["carrier_routes"].items()) {
      auto it = roles.find(carrier);
      if (it == roles.end()) throw DanglingReference(carrier);
      if (it->second != Role::Carrier)
        throw SchemaError("route owner is not a Carrier: " + carrier);
      CarrierRoute route;
      route.carrier = carrier;
      if (!r.contains("waypoints") || !r["waypoints"].is_array() ||
          r["waypoints"].empty())
        throw SchemaError("route needs waypoints: " + carrier);
      SimSeconds last = -1;
      for (const Json& w : r["waypoints"]) {
        Waypoint wp;
        wp.time = require_int(w, "time");
        wp.where = GeoPoint{require_int(w, "lat_e6"), require_int(w, "lon_e6")};
        if (!geo_in_bounds(wp.where))
          throw SchemaError("waypoint out of bounds: " + carrier);
        if (wp.time < 0 || wp.time > sc.duration_s)
          throw SchemaError("waypoint time out of range: " + carrier);
        if (wp.time <= last) throw SchemaError("waypoints not increasing: " + carrier);
        last = wp.time;
        route.waypoints.push_back(wp);
      }
      if (r.contains("accept_policy")) {
        const Json& pol = r["accept_policy"];
        if (pol.is_string() && pol == "always") route.accept_policy = AcceptAlways{};
        else if (pol.is_string() && pol == "never") route.accept_policy = AcceptNever{};
        else if (pol.is_object() && pol.contains("probability_ppm")) {
          const int64_t ppm = detail::require_int(pol, "probability_ppm");
          if (ppm < 0 || ppm > 1'000'000) throw SchemaError("probability_ppm out of range");
          route.accept_policy = AcceptProbability{ppm};
        } else {
          throw SchemaError("bad accept_policy: " + carrier);
        }
      }
      sc.carrier_routes.emplace(carrier, std::move(route));
    }
  }

  std::map<std::string, bool> product_ids;
  for (const auto& p : sc.products) product_ids[p.product_id] = true;

  if (j.contains("order_events")) {
    if (!j["order_events"].is_array())
      throw SchemaError("order_events must be an array");
    for (const Json& e : j["order_events"]) {
      OrderEvent ev;
      ev.time = require_int(e, "time");
      if (ev.time < 0 || ev.time > sc.duration_s)
        throw SchemaError("order_event time out of range");
      ev.consumer = require_str(e, "consumer");
      auto it = roles.find(ev.consumer);
      if (it == roles.end()) throw DanglingReference(ev.consumer);
      if (it->second != Role::Consumer)
        throw SchemaError("order author is not a Consumer: " + ev.consumer);
      ev.ttl_s = require_int(e, "ttl_s");
      if (ev.ttl_s <= 0) throw SchemaError("ttl_s must be > 0");
      if (!e.contains("items") || !e["items"].is_array() || e["items"].empty())
        throw SchemaError("order_event needs items");
      for (const Json& item : e["items"]) {
        OrderItem oi{detail::require_str(item, "product_id"),
                     require_int(item, "quantity")};
        if (oi.quantity < 1) throw SchemaError("quantity must be >= 1");
        if (!product_ids.count(oi.product_id)) throw DanglingReference(oi.product_id);
        ev.items.push_back(std::move(oi));
      }
      sc.order_events.push_back(std::move(ev));
    }
  }

  if (j.contains("producer_prep_s")) {
    if (!j["producer_prep_s"].is_object())
      throw SchemaError("producer_prep_s must be an object");
    for (const auto& [vendor, v] : j["producer_prep_s"].items()) {
      auto it = roles.find(vendor);
      if (it == roles.end()) throw DanglingReference(vendor);
      if (it->second != Role::Producer)
        throw SchemaError("prep delay owner is not a Producer: " + vendor);
      if (!v.is_number_integer() || v.get<int64_t>() < 0)
        throw SchemaError("bad prep delay: " + vendor);
      sc.producer_prep_s[vendor] = v.get<int64_t>();
    }
  }

  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open scenario: " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("scenario is not valid JSON: " + path);
  return parse_scenario(j);
}

}  // namespace chaindrop
