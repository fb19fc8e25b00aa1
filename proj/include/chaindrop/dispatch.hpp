#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaindrop/contracts.hpp"
#include "chaindrop/geo.hpp"
#include "chaindrop/marketplace.hpp"

namespace chaindrop {

struct CarrierStatus {
  AccountId carrier;
  GeoPoint location;
  SimSeconds reported_at = 0;
  std::optional<int64_t> rating_centi;  // [100, 500], absent until reviewed
  int64_t completed_deliveries = 0;
};

struct Offer {
  std::string suborder_id;
  GeoPoint vendor_location;
  SimSeconds created_at = 0;
  SimSeconds expires_at = 0;
};

struct AcceptanceAttempt {
  AccountId carrier;
  std::string suborder_id;
  SimSeconds attempted_at = 0;
};

enum class AcceptanceError { OutOfRange, StaleLocation, OfferClosed };

inline const char* acceptance_error_name(AcceptanceError e) {
  switch (e) {
    case AcceptanceError::OutOfRange: return "OutOfRange";
    case AcceptanceError::StaleLocation: return "StaleLocation";
    case AcceptanceError::OfferClosed: return "OfferClosed";
  }
  return "?";
}

inline bool location_fresh(const CarrierStatus& c, SimSeconds now,
                           const PricingConfig& cfg) {
  return now - c.reported_at <= 2 * cfg.location_update_period_s;
}

// Offers within the visibility radius, nearest first. Stale carriers see
// nothing at all.
inline std::vector<Offer> eligible_offers(const CarrierStatus& carrier,
                                          const std::vector<Offer>& offers,
                                          SimSeconds now,
                                          const PricingConfig& cfg) {
  std::vector<Offer> out;
  if (!location_fresh(carrier, now, cfg)) return out;
  std::vector<std::pair<int64_t, const Offer*>> keyed;
  for (const auto& offer : offers) {
    if (now >= offer.expires_at) continue;
    const int64_t d = haversine_distance(carrier.location, offer.vendor_location);
    if (d > cfg.offer_radius_m) continue;
    keyed.push_back({d, &offer});
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.first, a.second->suborder_id) <
                     std::tie(b.first, b.second->suborder_id);
            });
  for (const auto& [_, offer] : keyed) out.push_back(*offer);
  return out;
}

// The acceptance cap is wider than the offer radius to tolerate movement
// between location reports.
inline std::optional<AcceptanceError> check_acceptance(
    const CarrierStatus& carrier, const SubOrder& suborder,
    const GeoPoint& vendor_location, SimSeconds now,
    const PricingConfig& cfg) {
  if (suborder.state != OrderState::Placed) return AcceptanceError::OfferClosed;
  if (now >= suborder.expires_at()) return AcceptanceError::OfferClosed;
  if (!location_fresh(carrier, now, cfg)) return AcceptanceError::StaleLocation;
  if (haversine_distance(carrier.location, vendor_location) > cfg.accept_radius_m)
    return AcceptanceError::OutOfRange;
  return std::nullopt;
}

struct ConflictOutcome {
  AccountId winner;
  std::vector<AccountId> losers;
};

// Per contested suborder: highest rating wins (unrated counts as 0), then
// most completed deliveries, then earliest attempt, then smallest id.
inline std::map<std::string, ConflictOutcome> resolve_conflicts(
    const std::vector<AcceptanceAttempt>& attempts,
    const std::map<AccountId, CarrierStatus>& statuses) {
  std::map<std::string, std::vector<const AcceptanceAttempt*>> contested;
  for (const auto& attempt : attempts)
    contested[attempt.suborder_id].push_back(&attempt);

  std::map<std::string, ConflictOutcome> out;
  for (auto& [suborder_id, group] : contested) {
    auto key = [&](const AcceptanceAttempt* a) {
      const auto it = statuses.find(a->carrier);
      const int64_t rating =
          it != statuses.end() && it->second.rating_centi
              ? *it->second.rating_centi : 0;
      const int64_t completed =
          it != statuses.end() ? it->second.completed_deliveries : 0;
      // bigger rating/completed first, then earlier attempt, then smaller id
      return std::make_tuple(-rating, -completed, a->attempted_at, a->carrier);
    };
    const AcceptanceAttempt* best = group.front();
    for (const auto* a : group)
      if (key(a) < key(best)) best = a;
    ConflictOutcome outcome;
    outcome.winner = best->carrier;
    for (const auto* a : group)
      if (a->carrier != best->carrier) outcome.losers.push_back(a->carrier);
    std::sort(outcome.losers.begin(), outcome.losers.end());
    out.emplace(suborder_id, std::move(outcome));
  }
  return out;
}

}  // namespace chaindrop
