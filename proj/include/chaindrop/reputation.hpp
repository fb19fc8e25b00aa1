#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "chaindrop/chain.hpp"
#include "chaindrop/contracts.hpp"

namespace chaindrop {

struct Review {
  AccountId rater;
  AccountId ratee;
  std::string suborder_id;
  int64_t stars = 0;  // [1, 5]
  SimSeconds submitted_at = 0;
  std::string text;
};

struct RatingAggregate {
  AccountId account;
  int64_t rating_centi = 0;
  int64_t review_count = 0;
};

enum class ReviewRejection { NotFinalized, NotAParty, Duplicate, BadStars };

inline const char* review_rejection_name(ReviewRejection r) {
  switch (r) {
    case ReviewRejection::NotFinalized: return "NotFinalized";
    case ReviewRejection::NotAParty: return "NotAParty";
    case ReviewRejection::Duplicate: return "Duplicate";
    case ReviewRejection::BadStars: return "BadStars";
  }
  return "?";
}

// Replays the chain to find the suborder as the ledger knows it. The chain,
// not any live cache, is what the cross-check trusts.
inline std::optional<SubOrder> chain_suborder(const Chain& chain,
                                              const std::string& suborder_id) {
  ContractState state;
  const Directory dir = directory_from_chain(chain);
  for (const auto& block : chain.blocks)
    for (const auto& tx : block.txs) state.apply_transaction(tx, dir);
  auto it = state.suborders.find(suborder_id);
  if (it == state.suborders.end()) return std::nullopt;
  return it->second;
}

// Ledger cross-check: only the consumer of a Finalized suborder may rate its
// carrier or vendor, once per direction.
inline std::variant<TxEnvelope, ReviewRejection> submit_review(
    const Chain& chain, const Review& review, TxFactory& factory) {
  if (review.stars < 1 || review.stars > 5) return ReviewRejection::BadStars;
  const auto so = chain_suborder(chain, review.suborder_id);
  if (!so || so->state != OrderState::Finalized)
    return ReviewRejection::NotFinalized;
  if (review.rater != so->consumer) return ReviewRejection::NotAParty;
  const bool ratee_is_party =
      review.ratee == so->vendor ||
      (so->assigned_carrier && review.ratee == *so->assigned_carrier);
  if (!ratee_is_party || review.ratee == review.rater)
    return ReviewRejection::NotAParty;
  for (const auto& block : chain.blocks) {
    for (const auto& tx : block.txs) {
      if (tx.kind != TxKind::Review) continue;
      if (tx.payload.value("suborder_id", "") == review.suborder_id &&
          tx.author == review.rater &&
          tx.payload.value("ratee", "") == review.ratee)
        return ReviewRejection::Duplicate;
    }
  }
  Json payload;
  payload["suborder_id"] = review.suborder_id;
  payload["ratee"] = review.ratee;
  payload["stars"] = review.stars;
  payload["text"] = review.text;
  return factory.make(TxKind::Review, review.rater, review.submitted_at,
                      std::move(payload));
}

// Mean stars in centi-stars, rounded half away from zero. Absent when the
// account has no reviews; dispatch treats that as rating 0.
inline std::optional<RatingAggregate> aggregate_rating(
    const Chain& chain, const AccountId& account) {
  int64_t sum = 0;
  int64_t count = 0;
  for (const auto& block : chain.blocks) {
    for (const auto& tx : block.txs) {
      if (tx.kind != TxKind::Review) continue;
      if (tx.payload.value("ratee", "") != account) continue;
      sum += tx.payload.value("stars", int64_t{0});
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  RatingAggregate agg;
  agg.account = account;
  agg.rating_centi = (200 * sum + count) / (2 * count);
  agg.review_count = count;
  return agg;
}

}  // namespace chaindrop
