#include <gtest/gtest.h>

#include "chaindrop/contracts.hpp"
#include "test_util.hpp"

using namespace chaindrop;
using testutil::Lcg;

namespace {

struct Fixture {
  Directory dir;
  TxFactory factory{dir};
  ContractState state;

  Fixture() {
    dir.register_account("c1", Role::Consumer, 0);
    dir.register_account("v1", Role::Producer, 1);
    dir.register_account("k1", Role::Carrier, 2);
    dir.register_account("k2", Role::Carrier, 3);
    dir.register_account("system", Role::System, 4);
    apply(factory.make(TxKind::Register, "c1", 0,
                       Json{{"role", "Consumer"}, {"balance", 100000}}));
  }

  ApplyResult apply(const TxEnvelope& tx) {
    return state.apply_transaction(tx, dir);
  }

  TxEnvelope placed_tx(const std::string& id = "o0-0", SimSeconds at = 10) {
    return factory.make(
        TxKind::OrderPlaced, "c1", at,
        Json{{"suborder_id", id},
             {"parent_order_id", "o0"},
             {"consumer", "c1"},
             {"vendor", "v1"},
             {"items", Json::array({Json{{"product_id", "p1"}, {"quantity", 2}}})},
             {"items_cost", 1000},
             {"shipping_fee", 2100},
             {"ttl_s", 600}});
  }

  Json bill_payload(const std::string& id, SimSeconds handover, SimSeconds delivery) {
    const Bill bill = make_bill(state.suborders.at(id), handover, delivery,
                                GeoPoint{23800000, 90402000},
                                GeoPoint{23800000, 90400000});
    return Json{{"suborder_id", id}, {"bill", bill.to_json()}};
  }
};

}  // namespace

TEST(Lifecycle, FullFiveStepSequence) {
  Fixture f;
  EXPECT_TRUE(f.apply(f.placed_tx()).ok());
  EXPECT_TRUE(f.apply(f.factory.make(TxKind::OrderAccepted, "k1", 30,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  EXPECT_TRUE(f.apply(f.factory.make(TxKind::ProducerHandover, "v1", 90,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  EXPECT_TRUE(f.apply(f.factory.make(TxKind::Delivery, "k1", 120,
                                     f.bill_payload("o0-0", 90, 120))).ok());
  EXPECT_TRUE(f.apply(f.factory.make(TxKind::CustomerFinalize, "c1", 121,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  EXPECT_EQ(f.state.suborders.at("o0-0").state, OrderState::Finalized);
  EXPECT_EQ(f.state.book.balances.at("v1"), 1000);
  EXPECT_EQ(f.state.book.balances.at("k1"), 2100);
}

TEST(Lifecycle, DeliveryWhilePlacedIsInvalidTransition) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  auto r = f.apply(f.factory.make(TxKind::Delivery, "k1", 50,
                                  f.bill_payload("o0-0", 20, 50)));
  EXPECT_EQ(*r.error, ApplyError::InvalidTransition);
}

TEST(Lifecycle, HandoverByWrongProducerIsUnauthorized) {
  Fixture f;
  f.dir.register_account("v2", Role::Producer, 9);
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  ASSERT_TRUE(f.apply(f.factory.make(TxKind::OrderAccepted, "k1", 30,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  auto r = f.apply(f.factory.make(TxKind::ProducerHandover, "v2", 60,
                                  Json{{"suborder_id", "o0-0"}}));
  EXPECT_EQ(*r.error, ApplyError::Unauthorized);
}

TEST(Lifecycle, FinalizeByNonConsumerIsUnauthorized) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  ASSERT_TRUE(f.apply(f.factory.make(TxKind::OrderAccepted, "k1", 30,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  ASSERT_TRUE(f.apply(f.factory.make(TxKind::ProducerHandover, "v1", 60,
                                     Json{{"suborder_id", "o0-0"}})).ok());
  ASSERT_TRUE(f.apply(f.factory.make(TxKind::Delivery, "k1", 120,
                                     f.bill_payload("o0-0", 60, 120))).ok());
  auto r = f.apply(f.factory.make(TxKind::CustomerFinalize, "k1", 130,
                                  Json{{"suborder_id", "o0-0"}}));
  EXPECT_EQ(*r.error, ApplyError::Unauthorized);
}

TEST(Lifecycle, UnknownSubOrder) {
  Fixture f;
  auto r = f.apply(f.factory.make(TxKind::OrderAccepted, "k1", 30,
                                  Json{{"suborder_id", "nope"}}));
  EXPECT_EQ(*r.error, ApplyError::UnknownSubOrder);
}

TEST(Lifecycle, ExpiryRefundsEscrow) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  EXPECT_EQ(f.state.book.escrow.at("o0-0"), 3100);
  EXPECT_EQ(f.state.book.balances.at("c1"), 96900);
  auto r = f.apply(f.factory.make(TxKind::OrderExpired, "system", 700,
                                  Json{{"suborder_id", "o0-0"}}));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(f.state.suborders.at("o0-0").state, OrderState::Expired);
  EXPECT_EQ(f.state.book.balances.at("c1"), 100000);
  EXPECT_TRUE(f.state.book.escrow.empty());
}

TEST(Lifecycle, ExpiryByNonSystemIsUnauthorized) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  auto r = f.apply(f.factory.make(TxKind::OrderExpired, "k1", 700,
                                  Json{{"suborder_id", "o0-0"}}));
  EXPECT_EQ(*r.error, ApplyError::Unauthorized);
}

// Every (state x suborder-addressed tx kind) cell has a defined outcome and
// exactly six of them advance: the five lifecycle edges plus an accepted
// Review on a Finalized suborder.
TEST(Lifecycle, StateMachineExhaustive) {
  const std::vector<TxKind> kinds = {
      TxKind::OrderAccepted, TxKind::ProducerHandover, TxKind::Delivery,
      TxKind::CustomerFinalize, TxKind::OrderExpired, TxKind::Review};
  const std::vector<OrderState> states = {
      OrderState::Placed, OrderState::Accepted, OrderState::HandedOver,
      OrderState::Delivered, OrderState::Finalized, OrderState::Expired};

  int transitions = 0;
  for (OrderState st : states) {
    for (TxKind kind : kinds) {
      Fixture f;
      ASSERT_TRUE(f.apply(f.placed_tx()).ok());
      SubOrder& so = f.state.suborders.at("o0-0");
      so.state = st;
      if (st != OrderState::Placed && st != OrderState::Expired)
        so.assigned_carrier = "k1";
      if (st == OrderState::Delivered || st == OrderState::Finalized ||
          st == OrderState::Expired)
        f.state.book.escrow.erase("o0-0");
      so.handover_at = 60;

      AccountId author;
      Json payload{{"suborder_id", "o0-0"}};
      switch (kind) {
        case TxKind::OrderAccepted: author = "k1"; break;
        case TxKind::ProducerHandover: author = "v1"; break;
        case TxKind::Delivery:
          author = "k1";
          payload = f.bill_payload("o0-0", 60, 120);
          break;
        case TxKind::CustomerFinalize: author = "c1"; break;
        case TxKind::OrderExpired: author = "system"; break;
        case TxKind::Review:
          author = "c1";
          payload["ratee"] = "k1";
          payload["stars"] = 5;
          break;
        default: FAIL();
      }
      auto r = f.apply(f.factory.make(kind, author, 200, payload));
      if (r.ok()) {
        ++transitions;
      } else {
        EXPECT_TRUE(*r.error == ApplyError::InvalidTransition ||
                    *r.error == ApplyError::Unauthorized)
            << order_state_name(st) << " x " << tx_kind_name(kind);
      }
    }
  }
  EXPECT_EQ(transitions, 6);
}

TEST(Bill, TotalIsAdditive) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  Bill b = make_bill(f.state.suborders.at("o0-0"), 90, 120,
                     GeoPoint{1, 2}, GeoPoint{3, 4});
  EXPECT_EQ(b.items_cost, 1000);
  EXPECT_EQ(b.shipping_fee, 2100);
  EXPECT_EQ(b.total, 3100);
  EXPECT_LE(b.order_date, b.handover_date);
  EXPECT_LE(b.handover_date, b.delivery_date);
}

TEST(Bill, DatesOutOfOrderRejected) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  // handover before placement
  EXPECT_THROW(make_bill(f.state.suborders.at("o0-0"), 5, 120,
                         GeoPoint{1, 2}, GeoPoint{3, 4}),
               BadDates);
  EXPECT_THROW(make_bill(f.state.suborders.at("o0-0"), 120, 90,
                         GeoPoint{1, 2}, GeoPoint{3, 4}),
               BadDates);
}

TEST(Bill, SurvivesChainRoundTrip) {
  Fixture f;
  ASSERT_TRUE(f.apply(f.placed_tx()).ok());
  Bill b = make_bill(f.state.suborders.at("o0-0"), 90, 120,
                     GeoPoint{23800000, 90402000}, GeoPoint{23800000, 90400000});
  Bill back = Bill::from_json(Json::parse(canonical_serialize(b.to_json())));
  EXPECT_EQ(back.suborder_id, b.suborder_id);
  EXPECT_EQ(back.pickup, b.pickup);
  EXPECT_EQ(back.delivery, b.delivery);
  EXPECT_EQ(back.order_date, b.order_date);
  EXPECT_EQ(back.handover_date, b.handover_date);
  EXPECT_EQ(back.delivery_date, b.delivery_date);
  EXPECT_EQ(back.total, b.total);
}

TEST(Settle, SplitsEscrowBetweenVendorAndCarrier) {
  BalanceBook book;
  book.escrow["s1"] = 3100;
  SubOrder so;
  so.suborder_id = "s1";
  so.vendor = "v1";
  so.assigned_carrier = "k1";
  so.items_cost = 1000;
  so.shipping_fee = 2100;
  settle_payment(book, so);
  EXPECT_EQ(book.balances["v1"], 1000);
  EXPECT_EQ(book.balances["k1"], 2100);
  EXPECT_TRUE(book.escrow.empty());
}

TEST(Settle, ShortEscrowHaltsTheRun) {
  BalanceBook book;
  book.escrow["s1"] = 3000;
  SubOrder so;
  so.suborder_id = "s1";
  so.vendor = "v1";
  so.assigned_carrier = "k1";
  so.items_cost = 1000;
  so.shipping_fee = 2100;
  EXPECT_THROW(settle_payment(book, so), EscrowMismatch);
}

// Money is only ever moved, never created or destroyed, once accounts are
// funded.
TEST(Conservation, RandomLifecycleSequences) {
  Lcg rng(7);
  for (int round = 0; round < 20; ++round) {
    Fixture f;
    const Money initial = f.state.book.total();
    const int orders = 5 + static_cast<int>(rng.below(10));
    for (int i = 0; i < orders; ++i) {
      const std::string id = "r" + std::to_string(round) + "-" + std::to_string(i);
      ASSERT_TRUE(f.apply(f.placed_tx(id, 10 + i)).ok());
      EXPECT_EQ(f.state.book.total(), initial);
      switch (rng.below(3)) {
        case 0:  // expire
          ASSERT_TRUE(f.apply(f.factory.make(TxKind::OrderExpired, "system",
                                             700 + i, Json{{"suborder_id", id}})).ok());
          break;
        case 1:  // deliver and finalize
        case 2: {
          ASSERT_TRUE(f.apply(f.factory.make(TxKind::OrderAccepted,
                                             rng.below(2) ? "k1" : "k2", 30 + i,
                                             Json{{"suborder_id", id}})).ok());
          ASSERT_TRUE(f.apply(f.factory.make(TxKind::ProducerHandover, "v1",
                                             60 + i, Json{{"suborder_id", id}})).ok());
          ASSERT_TRUE(f.apply(f.factory.make(TxKind::Delivery,
                                             *f.state.suborders.at(id).assigned_carrier,
                                             120 + i, f.bill_payload(id, 60 + i, 120 + i))).ok());
          break;
        }
      }
      EXPECT_EQ(f.state.book.total(), initial);
    }
  }
}

// Replaying a chain's txs into a fresh state reproduces the original state.
TEST(Replay, ChainIsSourceOfTruth) {
  testutil::LifecycleFixture lf;
  ContractState replayed;
  for (const auto& block : lf.chain.blocks)
    for (const auto& tx : block.txs)
      replayed.apply_transaction(tx, lf.dir);
  EXPECT_EQ(replayed.suborders.at(lf.suborder_id).state, OrderState::Finalized);
  EXPECT_EQ(replayed.book.balances, lf.state.book.balances);
  EXPECT_EQ(replayed.book.escrow, lf.state.book.escrow);
}
