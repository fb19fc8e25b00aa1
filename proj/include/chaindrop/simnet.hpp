#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chaindrop/chain.hpp"
#include "chaindrop/contracts.hpp"
#include "chaindrop/dispatch.hpp"
#include "chaindrop/marketplace.hpp"
#include "chaindrop/reputation.hpp"
#include "chaindrop/scenario.hpp"

namespace chaindrop {

enum class NodeId { Node1, Node2, Node3 };

inline const char* node_name(NodeId n) {
  switch (n) {
    case NodeId::Node1: return "Node1";
    case NodeId::Node2: return "Node2";
    case NodeId::Node3: return "Node3";
  }
  return "?";
}

// Registration txs land on Node1, order lifecycle on Node2, reviews on Node3.
inline NodeId ingest_node_for(TxKind kind) {
  switch (kind) {
    case TxKind::Register: return NodeId::Node1;
    case TxKind::Review: return NodeId::Node3;
    default: return NodeId::Node2;
  }
}

struct Node {
  NodeId node_id = NodeId::Node1;
  std::vector<std::string> inbox;  // tx ids, arrival order
};

struct Metrics {
  int64_t orders_placed = 0;
  int64_t suborders_created = 0;
  int64_t accepted = 0;
  int64_t expired = 0;
  int64_t delivered = 0;
  int64_t finalized = 0;
  int64_t mean_delivery_latency_s = 0;
  int64_t chain_height = 0;
  int64_t tx_count = 0;
  std::map<AccountId, Money> earnings;

  std::string earnings_cell() const {
    std::string out;
    for (const auto& [acct, amount] : earnings) {
      if (!out.empty()) out += ";";
      out += acct + ":" + std::to_string(amount);
    }
    return out;
  }

  std::string csv_header() const {
    return "orders_placed,suborders_created,accepted,expired,delivered,"
           "finalized,mean_delivery_latency_s,chain_height,tx_count,earnings";
  }

  std::string csv_row() const {
    std::ostringstream os;
    os << orders_placed << ',' << suborders_created << ',' << accepted << ','
       << expired << ',' << delivered << ',' << finalized << ','
       << mean_delivery_latency_s << ',' << chain_height << ',' << tx_count
       << ',' << earnings_cell();
    return os.str();
  }
};

// Total order over simultaneous events. Determinism requires a fixed rank.
enum class EventKind {
  Movement = 0,
  Placement = 1,
  Acceptance = 2,
  Handover = 3,
  Delivery = 4,
  Finalize = 5,
  Expiry = 6,
  Propagation = 7,
  Sealing = 8,
};

struct SimEvent {
  SimSeconds time = 0;
  EventKind kind = EventKind::Movement;
  std::string subject;  // tie-break within a kind
  int64_t payload_index = -1;

  bool operator>(const SimEvent& other) const {
    return std::tie(time, kind, subject, payload_index) >
           std::tie(other.time, other.kind, other.subject, other.payload_index);
  }
};

inline GeoPoint route_position(const CarrierRoute& route, SimSeconds t) {
  const auto& wps = route.waypoints;
  if (t <= wps.front().time) return wps.front().where;
  if (t >= wps.back().time) return wps.back().where;
  for (size_t i = 1; i < wps.size(); ++i) {
    if (t > wps[i].time) continue;
    const Waypoint& a = wps[i - 1];
    const Waypoint& b = wps[i];
    const double f = static_cast<double>(t - a.time) /
                     static_cast<double>(b.time - a.time);
    return GeoPoint{
        a.where.lat_e6 +
            static_cast<int64_t>(std::llround(f * static_cast<double>(b.where.lat_e6 - a.where.lat_e6))),
        a.where.lon_e6 +
            static_cast<int64_t>(std::llround(f * static_cast<double>(b.where.lon_e6 - a.where.lon_e6)))};
  }
  return wps.back().where;
}

inline constexpr int64_t kArrivalGeofenceM = 50;
inline const AccountId kSystemAccount = "system";

class World {
 public:
  explicit World(const Scenario& scenario)
      : scenario_(scenario),
        cfg_(scenario.config),
        factory_(directory_),
        rng_(scenario.config.seed) {
    nodes_[0].node_id = NodeId::Node1;
    nodes_[1].node_id = NodeId::Node2;
    nodes_[2].node_id = NodeId::Node3;
    for (const auto& p : scenario.products) catalog_[p.product_id] = p;
    bootstrap();
  }

  SimSeconds clock() const { return clock_; }
  const Chain& chain() const { return chain_; }
  const ContractState& contracts() const { return contracts_; }
  const Directory& directory() const { return directory_; }
  const Metrics& metrics() const { return metrics_; }
  const std::vector<ContractEvent>& event_log() const { return event_log_; }
  const std::map<std::string, NodeId>& ingest_record() const { return ingest_record_; }
  const std::map<AccountId, CarrierStatus>& carrier_statuses() const { return statuses_; }

  bool pending_events() const { return !queue_.empty(); }

  // Dequeues and applies exactly one event.
  void step() {
    const SimEvent ev = queue_.top();
    queue_.pop();
    clock_ = ev.time;
    switch (ev.kind) {
      case EventKind::Movement: on_movement(ev); break;
      case EventKind::Placement: on_placement(ev); break;
      case EventKind::Acceptance: on_acceptance_scan(ev); break;
      case EventKind::Handover: on_handover(ev); break;
      case EventKind::Delivery: on_delivery(ev); break;
      case EventKind::Finalize: on_finalize(ev); break;
      case EventKind::Expiry: on_expiry(ev); break;
      case EventKind::Propagation: on_propagation(ev); break;
      case EventKind::Sealing: on_sealing(ev); break;
    }
  }

  void run_to_completion() {
    while (!queue_.empty()) step();
    if (!mempool_.empty()) {
      // trailing txs: one final sealing round past the last tick
      const SimSeconds t =
          ((clock_ / cfg_.block_period_s) + 1) * cfg_.block_period_s;
      clock_ = t;
      seal_round(t);
    }
    finish_metrics();
  }

 private:
  void bootstrap() {
    directory_.register_account(kSystemAccount, Role::System, 0);
    std::vector<ScenarioAccount> accounts = scenario_.accounts;
    std::sort(accounts.begin(), accounts.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& a : accounts)
      directory_.register_account(a.id, a.role, 0, a.home);

    // Register txs for everyone, system first, then sorted ids.
    apply_and_submit(factory_.make(
        TxKind::Register, kSystemAccount, 0,
        Json{{"role", "System"}, {"is_sealer", true}, {"balance", 0}}));
    for (const auto& a : accounts) {
      Json payload;
      payload["role"] = role_name(a.role);
      payload["is_sealer"] = role_seals(a.role);
      payload["balance"] = a.balance;
      payload["home"] = {{"lat_e6", a.home.lat_e6}, {"lon_e6", a.home.lon_e6}};
      apply_and_submit(factory_.make(TxKind::Register, a.id, 0, std::move(payload)));
      if (a.role == Role::Carrier) {
        CarrierStatus st;
        st.carrier = a.id;
        st.location = a.home;
        st.reported_at = 0;
        statuses_[a.id] = st;
      }
    }

    for (SimSeconds t = 0; t <= scenario_.duration_s;
         t += cfg_.location_update_period_s) {
      for (const auto& [carrier, _] : scenario_.carrier_routes)
        queue_.push({t, EventKind::Movement, carrier, -1});
      queue_.push({t, EventKind::Acceptance, "-", -1});
    }
    for (size_t i = 0; i < scenario_.order_events.size(); ++i)
      queue_.push({scenario_.order_events[i].time, EventKind::Placement,
                   "o" + std::to_string(i), static_cast<int64_t>(i)});
    for (SimSeconds t = cfg_.block_period_s; t <= scenario_.duration_s;
         t += cfg_.block_period_s)
      queue_.push({t, EventKind::Sealing, "-", -1});
  }

  void submit(const TxEnvelope& tx) {
    const NodeId node = ingest_node_for(tx.kind);
    nodes_[static_cast<size_t>(node)].inbox.push_back(tx.tx_id);
    ingest_record_[tx.tx_id] = node;
    mempool_.push_back(tx);
    metrics_.tx_count += 1;
    queue_.push({clock_ + cfg_.propagation_delay_s, EventKind::Propagation,
                 tx.tx_id, -1});
  }

  void apply_and_submit(const TxEnvelope& tx) {
    ApplyResult r = contracts_.apply_transaction(tx, directory_);
    if (!r.ok())
      throw ContractAbort(std::string("tx ") + tx.tx_id + " rejected: " +
                          apply_error_name(*r.error));
    for (auto& e : r.events) event_log_.push_back(e);
    submit(tx);
  }

  void log(const std::string& kind, const std::string& suborder_id,
           const std::string& detail) {
    event_log_.push_back({clock_, kind, suborder_id, detail});
  }

  void on_movement(const SimEvent& ev) {
    auto route_it = scenario_.carrier_routes.find(ev.subject);
    if (route_it == scenario_.carrier_routes.end()) return;
    CarrierStatus& st = statuses_[ev.subject];
    st.carrier = ev.subject;
    st.location = route_position(route_it->second, ev.time);
    st.reported_at = ev.time;

    // arrival check: assigned suborders in HandedOver within the geofence
    for (const auto& [id, so] : contracts_.suborders) {
      if (so.state != OrderState::HandedOver) continue;
      if (!so.assigned_carrier || *so.assigned_carrier != ev.subject) continue;
      const GeoPoint home = *directory_.at(so.consumer).home_location;
      if (haversine_distance(st.location, home) <= kArrivalGeofenceM)
        queue_.push({ev.time, EventKind::Delivery, id, -1});
    }
  }

  void on_placement(const SimEvent& ev) {
    const OrderEvent& oe = scenario_.order_events[static_cast<size_t>(ev.payload_index)];
    const GeoPoint home = *directory_.at(oe.consumer).home_location;
    PlacedOrder placed;
    try {
      placed = place_order(oe.consumer, ev.subject, oe.items, oe.ttl_s, ev.time,
                           catalog_, cfg_, home, contracts_.book, factory_);
    } catch (const InsufficientFunds&) {
      log("rejected", ev.subject, "insufficient funds " + oe.consumer);
      return;
    }
    metrics_.orders_placed += 1;
    for (size_t i = 0; i < placed.suborders.size(); ++i) {
      apply_and_submit(placed.txs[i]);
      const SubOrder& so = placed.suborders[i];
      metrics_.suborders_created += 1;
      const GeoPoint pickup = catalog_.at(so.items.front().product_id).location;
      pickup_points_[so.suborder_id] = pickup;
      offers_[so.suborder_id] =
          Offer{so.suborder_id, pickup, ev.time, so.placed_at + so.ttl_s};
      queue_.push({so.placed_at + so.ttl_s, EventKind::Expiry, so.suborder_id, -1});
    }
  }

  bool policy_accepts(const AcceptPolicy& policy) {
    if (std::holds_alternative<AcceptAlways>(policy)) return true;
    if (std::holds_alternative<AcceptNever>(policy)) return false;
    const auto& p = std::get<AcceptProbability>(policy);
    return static_cast<int64_t>(rng_() % 1'000'000) < p.ppm;
  }

  void on_acceptance_scan(const SimEvent& ev) {
    std::vector<Offer> open;
    for (const auto& [id, offer] : offers_) {
      auto it = contracts_.suborders.find(id);
      if (it == contracts_.suborders.end()) continue;
      if (it->second.state != OrderState::Placed) continue;
      if (ev.time >= offer.expires_at) continue;
      open.push_back(offer);
    }
    if (open.empty()) return;

    std::vector<AcceptanceAttempt> attempts;
    for (const auto& [carrier, route] : scenario_.carrier_routes) {
      auto st_it = statuses_.find(carrier);
      if (st_it == statuses_.end()) continue;
      const auto eligible = eligible_offers(st_it->second, open, ev.time, cfg_);
      if (eligible.empty()) continue;
      if (!policy_accepts(route.accept_policy)) continue;
      const SubOrder& so = contracts_.suborders.at(eligible.front().suborder_id);
      if (check_acceptance(st_it->second, so, eligible.front().vendor_location,
                           ev.time, cfg_))
        continue;
      attempts.push_back({carrier, eligible.front().suborder_id, ev.time});
    }
    if (attempts.empty()) return;

    for (const auto& [suborder_id, outcome] : resolve_conflicts(attempts, statuses_)) {
      apply_and_submit(factory_.make(TxKind::OrderAccepted, outcome.winner,
                                     ev.time, Json{{"suborder_id", suborder_id}}));
      metrics_.accepted += 1;
      accept_locations_[suborder_id] = statuses_.at(outcome.winner).location;
      for (const auto& loser : outcome.losers)
        log("lost", suborder_id, loser);
      const SubOrder& so = contracts_.suborders.at(suborder_id);
      int64_t prep = 0;
      auto prep_it = scenario_.producer_prep_s.find(so.vendor);
      if (prep_it != scenario_.producer_prep_s.end()) prep = prep_it->second;
      queue_.push({ev.time + prep, EventKind::Handover, suborder_id, -1});
    }
  }

  void on_handover(const SimEvent& ev) {
    auto it = contracts_.suborders.find(ev.subject);
    if (it == contracts_.suborders.end() ||
        it->second.state != OrderState::Accepted)
      return;
    apply_and_submit(factory_.make(TxKind::ProducerHandover, it->second.vendor,
                                   ev.time, Json{{"suborder_id", ev.subject}}));
  }

  void on_delivery(const SimEvent& ev) {
    auto it = contracts_.suborders.find(ev.subject);
    if (it == contracts_.suborders.end() ||
        it->second.state != OrderState::HandedOver)
      return;
    SubOrder& so = it->second;
    const GeoPoint home = *directory_.at(so.consumer).home_location;
    const Bill bill = make_bill(so, so.handover_at, ev.time,
                                pickup_points_.at(so.suborder_id), home);
    Json payload;
    payload["suborder_id"] = so.suborder_id;
    payload["bill"] = bill.to_json();
    apply_and_submit(factory_.make(TxKind::Delivery, *so.assigned_carrier,
                                   ev.time, std::move(payload)));
    metrics_.delivered += 1;
    delivery_latencies_.push_back(ev.time - so.placed_at);
    metrics_.earnings[so.vendor] += so.items_cost;
    metrics_.earnings[*so.assigned_carrier] += so.shipping_fee;
    statuses_[*so.assigned_carrier].completed_deliveries += 1;
    queue_.push({ev.time + cfg_.propagation_delay_s, EventKind::Finalize,
                 so.suborder_id, -1});
  }

  void on_finalize(const SimEvent& ev) {
    auto it = contracts_.suborders.find(ev.subject);
    if (it == contracts_.suborders.end() ||
        it->second.state != OrderState::Delivered)
      return;
    apply_and_submit(factory_.make(TxKind::CustomerFinalize, it->second.consumer,
                                   ev.time, Json{{"suborder_id", ev.subject}}));
    metrics_.finalized += 1;
  }

  void on_expiry(const SimEvent& ev) {
    for (const auto& tx : expire_orders(contracts_.suborders, ev.time,
                                        kSystemAccount, factory_)) {
      apply_and_submit(tx);
      metrics_.expired += 1;
      offers_.erase(tx.payload["suborder_id"].get<std::string>());
    }
  }

  void on_propagation(const SimEvent& ev) {
    auto it = ingest_record_.find(ev.subject);
    if (it == ingest_record_.end()) return;
    for (auto& node : nodes_) {
      if (node.node_id == it->second) continue;
      node.inbox.push_back(ev.subject);
    }
    log("propagated", "-", ev.subject);
  }

  void on_sealing(const SimEvent& ev) { seal_round(ev.time); }

  void seal_round(SimSeconds now) {
    if (mempool_.empty()) return;  // never seal empty blocks
    const AccountId sealer = next_sealer(chain_, directory_);
    Block b = seal_block(mempool_, chain_, sealer, now, directory_);
    chain_.blocks.push_back(b);
    std::set<std::string> sealed;
    for (const auto& tx : mempool_) sealed.insert(tx.tx_id);
    for (auto& node : nodes_) {
      auto& inbox = node.inbox;
      inbox.erase(std::remove_if(inbox.begin(), inbox.end(),
                                 [&](const std::string& id) { return sealed.count(id) > 0; }),
                  inbox.end());
    }
    mempool_.clear();
    log("sealed", "-", "block " + std::to_string(b.index) + " by " + sealer +
                           " txs " + std::to_string(b.txs.size()));
  }

  void finish_metrics() {
    metrics_.chain_height = chain_.height();
    if (!delivery_latencies_.empty()) {
      int64_t sum = 0;
      for (int64_t l : delivery_latencies_) sum += l;
      const int64_t n = static_cast<int64_t>(delivery_latencies_.size());
      metrics_.mean_delivery_latency_s = (2 * sum + n) / (2 * n);
    }
  }

  const Scenario& scenario_;
  SimConfig cfg_;
  Directory directory_;
  TxFactory factory_;
  std::mt19937_64 rng_;
  SimSeconds clock_ = 0;
  Chain chain_;
  ContractState contracts_;
  Catalog catalog_;
  std::map<AccountId, CarrierStatus> statuses_;
  std::map<std::string, Offer> offers_;
  std::map<std::string, GeoPoint> pickup_points_;
  std::map<std::string, GeoPoint> accept_locations_;
  std::array<Node, 3> nodes_;
  std::vector<TxEnvelope> mempool_;
  std::map<std::string, NodeId> ingest_record_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<SimEvent>> queue_;
  std::vector<ContractEvent> event_log_;
  Metrics metrics_;
  std::vector<int64_t> delivery_latencies_;

 public:
  const std::map<std::string, GeoPoint>& accept_locations() const {
    return accept_locations_;
  }
};

struct RunArtifacts {
  Metrics metrics;
  std::filesystem::path ledger_path;
  std::filesystem::path metrics_path;
  std::filesystem::path events_path;
};

inline RunArtifacts run_simulation(const Scenario& scenario,
                                   const std::filesystem::path& out_dir) {
  World world(scenario);
  world.run_to_completion();

  std::filesystem::create_directories(out_dir);
  RunArtifacts art;
  art.metrics = world.metrics();
  art.ledger_path = out_dir / "ledger.jsonl";
  art.metrics_path = out_dir / "metrics.csv";
  art.events_path = out_dir / "events.log";

  write_ledger_file(world.chain(), art.ledger_path.string());

  std::ofstream mf(art.metrics_path, std::ios::binary);
  mf << art.metrics.csv_header() << "\n" << art.metrics.csv_row() << "\n";

  std::ofstream ef(art.events_path, std::ios::binary);
  for (const auto& e : world.event_log())
    ef << e.time << ',' << e.kind << ',' << e.suborder_id << ',' << e.detail
       << "\n";
  return art;
}

}  // namespace chaindrop
