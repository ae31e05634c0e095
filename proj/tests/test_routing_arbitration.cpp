#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <random>
#include <vector>

#include "rtsnoc/routing_arbitration.hpp"

using namespace rtsnoc;

TEST(XyRoute, CorrectsXBeforeY) {
  const Address dst{{2, 3}, Port::SW};
  EXPECT_EQ(xy_route({0, 0}, dst), Port::EE);
  EXPECT_EQ(xy_route({3, 0}, dst), Port::WW);
  EXPECT_EQ(xy_route({2, 0}, dst), Port::NN);
  EXPECT_EQ(xy_route({2, 5}, dst), Port::SS);
  EXPECT_EQ(xy_route({2, 3}, dst), Port::SW);
}

TEST(XyRoute, WalkIsMinimalAndNeverTurnsBackToX) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    Coord at{static_cast<int>(rng() % 8), static_cast<int>(rng() % 8)};
    const Address dst{{static_cast<int>(rng() % 8), static_cast<int>(rng() % 8)}, Port::NE};
    const int expected = std::abs(dst.router.x - at.x) + std::abs(dst.router.y - at.y);
    int hops = 0;
    bool moved_y = false;
    for (;;) {
      const Port p = xy_route(at, dst);
      if (p == Port::EE || p == Port::WW) {
        ASSERT_FALSE(moved_y);
        at.x += p == Port::EE ? 1 : -1;
      } else if (p == Port::NN || p == Port::SS) {
        moved_y = true;
        at.y += p == Port::NN ? 1 : -1;
      } else {
        EXPECT_EQ(p, dst.port);
        break;
      }
      ++hops;
      ASSERT_LE(hops, expected);
    }
    EXPECT_EQ(hops, expected);
  }
}

TEST(Arbiter, InitialOrderPutsCardinalChannelsFirst) {
  const auto s = init_arbiter({Port::NW, Port::EE, Port::SE, Port::NN});
  EXPECT_EQ(s.priority_order, (std::vector<Port>{Port::NN, Port::EE, Port::SE, Port::NW}));
  EXPECT_EQ(s.budget[index(Port::EE)], 1u);
  EXPECT_EQ(s.budget[index(Port::SE)], 0u);
}

TEST(Arbiter, InitRejectsBadRegistrations) {
  EXPECT_THROW(init_arbiter({}), Error);
  EXPECT_THROW(init_arbiter({Port::NN, Port::NN}), Error);
}

TEST(Arbiter, NoRequestLeavesStateAlone) {
  const auto s = init_arbiter({Port::NN, Port::NE});
  const auto g = arbiter_grant(s, {});
  EXPECT_FALSE(g.granted.has_value());
  EXPECT_EQ(g.state, s);
}

TEST(Arbiter, UnregisteredRequestIsAProtocolError) {
  const auto s = init_arbiter({Port::NN, Port::NE});
  try {
    arbiter_grant(s, {Port::SW});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Protocol);
  }
}

TEST(Arbiter, CreditsGiveBurstsThenRotate) {
  auto s = init_arbiter({Port::EE, Port::NE}, {{Port::EE, 3}});
  std::vector<Port> seq;
  for (int i = 0; i < 8; ++i) {
    auto g = arbiter_grant(std::move(s), {Port::EE, Port::NE});
    seq.push_back(*g.granted);
    s = std::move(g.state);
  }
  const std::vector<Port> expected{Port::EE, Port::EE, Port::EE, Port::NE,
                                   Port::EE, Port::EE, Port::EE, Port::NE};
  EXPECT_EQ(seq, expected);
}

TEST(Arbiter, QuietOwnerForfeitsItsBurst) {
  auto s = init_arbiter({Port::EE, Port::NE}, {{Port::EE, 3}});
  auto g = arbiter_grant(s, {Port::EE});
  EXPECT_EQ(g.state.last_granted, Port::EE);
  g = arbiter_grant(g.state, {Port::NE});
  EXPECT_EQ(*g.granted, Port::NE);
  EXPECT_EQ(g.state.credits[index(Port::EE)], 3u);
  // EE was demoted when it went quiet, then NE went behind it
  EXPECT_EQ(g.state.priority_order, (std::vector<Port>{Port::EE, Port::NE}));
}

TEST(Arbiter, NoRequesterStarvesUnderFullLoad) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Port> inputs;
    CreditConfig credits;
    std::uint32_t window = 0;
    for (Port p : kAllPorts) {
      if (rng() % 2) continue;
      inputs.push_back(p);
      const std::uint32_t c = 1 + rng() % 4;
      if (is_priority_channel(p)) credits[p] = c;
      window += is_priority_channel(p) ? c : 1;
    }
    if (inputs.empty()) continue;
    PortSet all;
    for (Port p : inputs) all.insert(p);
    auto s = init_arbiter(inputs, credits);
    std::map<Port, int> since;
    for (Port p : inputs) since[p] = 0;
    for (int round = 0; round < 200; ++round) {
      auto g = arbiter_grant(std::move(s), all);
      s = std::move(g.state);
      for (auto& [p, n] : since) {
        n = p == *g.granted ? 0 : n + 1;
        ASSERT_LT(static_cast<std::uint32_t>(n), window) << "channel " << to_string(p) << " starved";
      }
    }
  }
}

TEST(Arbiter, NonPriorityChannelsAlternate) {
  auto s = init_arbiter({Port::NE, Port::SE, Port::SW});
  std::vector<Port> seq;
  for (int i = 0; i < 6; ++i) {
    auto g = arbiter_grant(std::move(s), {Port::NE, Port::SE, Port::SW});
    seq.push_back(*g.granted);
    s = std::move(g.state);
  }
  EXPECT_EQ(seq, (std::vector<Port>{Port::NE, Port::SE, Port::SW, Port::NE, Port::SE, Port::SW}));
}
