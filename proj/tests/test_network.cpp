#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <vector>

#include "rtsnoc/network.hpp"

using namespace rtsnoc;

namespace {

// One core on every free port, in router-id then port order.
std::vector<Placement> fill(int w, int h) {
  const Network bare = build_mesh(w, h, {}, 4, RouterKind::Rts);
  std::vector<Placement> out;
  CoreId id = 0;
  for (std::size_t r = 0; r < bare.router_count(); ++r) {
    const Coord c = bare.coord_of(r);
    for (Port p : kAllPorts) {
      if (!bare.is_link(c, p)) out.push_back({id++, {c, p}});
    }
  }
  return out;
}

FlowSpec flow(const Network& net, std::string id, CoreId src, CoreId dst) {
  FlowSpec f;
  f.id = std::move(id);
  f.src = net.core_address(src);
  f.dst = net.core_address(dst);
  f.size = FixedSize{6};
  return f;
}

std::vector<FlowSpec> fig7_flows(const Network& net) {
  return {flow(net, "s3", 3, 12), flow(net, "s7", 7, 12), flow(net, "s13", 13, 12), flow(net, "s18", 18, 12),
          flow(net, "s23", 23, 12)};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Validation;
}

}  // namespace

TEST(Mesh, TwoByTwoHostsTwentyFourCores) {
  // 4 routers x (8 ports - 2 links)
  const auto pl = fill(2, 2);
  EXPECT_EQ(pl.size(), 24u);
  const Network net = build_mesh(2, 2, pl, 4, RouterKind::Rts);
  EXPECT_EQ(net.cores().size(), 24u);
  EXPECT_EQ(net.core_address(7), (Address{{1, 0}, Port::EE}));
  EXPECT_EQ(net.core_address(12), (Address{{0, 1}, Port::NN}));
}

TEST(Mesh, LinksFollowTheGrid) {
  const Network net = build_mesh(3, 2, {}, 4, RouterKind::Rts);
  EXPECT_TRUE(net.is_link({0, 0}, Port::EE));
  EXPECT_FALSE(net.is_link({0, 0}, Port::WW));
  EXPECT_TRUE(net.is_link({1, 1}, Port::SS));
  EXPECT_FALSE(net.is_link({1, 1}, Port::NN));
  EXPECT_EQ(net.router_id({2, 1}), 5u);
  EXPECT_EQ(net.coord_of(5), (Coord{2, 1}));
}

TEST(Mesh, BuildErrors) {
  EXPECT_EQ(kind_of([] { build_mesh(0, 2, {}, 4, RouterKind::Rts); }), ErrorKind::Configuration);
  EXPECT_EQ(kind_of([] { build_mesh(2, 2, {}, 0, RouterKind::Rts); }), ErrorKind::Configuration);
  EXPECT_EQ(kind_of([] { build_mesh(2, 2, {{0, {{2, 0}, Port::NE}}}, 4, RouterKind::Rts); }), ErrorKind::Bounds);
  EXPECT_EQ(kind_of([] { build_mesh(2, 2, {{0, {{0, 0}, Port::EE}}}, 4, RouterKind::Rts); }),
            ErrorKind::Placement);
  EXPECT_EQ(kind_of([] {
              build_mesh(2, 2, {{0, {{0, 0}, Port::NE}}, {1, {{0, 0}, Port::NE}}}, 4, RouterKind::Rts);
            }),
            ErrorKind::Placement);
  EXPECT_EQ(kind_of([] {
              build_mesh(2, 2, {{0, {{0, 0}, Port::NE}}, {0, {{0, 0}, Port::SE}}}, 4, RouterKind::Rts);
            }),
            ErrorKind::Placement);
}

TEST(Paths, Sigma7CrossesThreeRouters) {
  const Network net = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  const auto path = xy_path(net, net.core_address(7), net.core_address(12));
  ASSERT_EQ(path.size(), 3u);
  EXPECT_EQ(path[0], (Hop{{1, 0}, Port::EE, Port::WW}));
  EXPECT_EQ(path[1], (Hop{{0, 0}, Port::EE, Port::NN}));
  EXPECT_EQ(path[2], (Hop{{0, 1}, Port::SS, Port::NN}));
}

TEST(Paths, Errors) {
  const Network net = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  EXPECT_EQ(kind_of([&] { xy_path(net, net.core_address(3), net.core_address(3)); }), ErrorKind::Lookup);
  EXPECT_EQ(kind_of([&] { xy_path(net, {{0, 0}, Port::EE}, net.core_address(3)); }), ErrorKind::Lookup);
  EXPECT_EQ(kind_of([&] { net.core_address(99); }), ErrorKind::Lookup);
}

TEST(Paths, RandomPathsAreConnectedAndMinimal) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 5);
    const int h = 1 + static_cast<int>(rng() % 5);
    const auto pl = fill(w, h);
    const Network net = build_mesh(w, h, pl, 4, RouterKind::Rts);
    const auto& a = pl[rng() % pl.size()].address;
    const auto& b = pl[rng() % pl.size()].address;
    if (a == b) continue;
    const auto path = xy_path(net, a, b);
    EXPECT_EQ(path.size(),
              static_cast<std::size_t>(std::abs(a.router.x - b.router.x) + std::abs(a.router.y - b.router.y) + 1));
    EXPECT_EQ(path.front().input, a.port);
    EXPECT_EQ(path.back().output, b.port);
    for (std::size_t i = 1; i < path.size(); ++i) {
      EXPECT_EQ(Network::neighbour(path[i - 1].router, path[i - 1].output), path[i].router);
      EXPECT_EQ(path[i].input, opposite(path[i - 1].output));
      EXPECT_TRUE(net.is_link(path[i - 1].router, path[i - 1].output));
    }
  }
}

TEST(Contention, Fig7ProfileOfSigma7) {
  const Network net = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  const auto prof = contention_profile(net, fig7_flows(net), "s7");
  EXPECT_EQ(prof.contenders, (std::vector<std::uint32_t>{1, 2, 3}));
  EXPECT_EQ(prof.k, 5u);
  EXPECT_EQ(prof.h_path(), 3u);
  EXPECT_EQ(prof.flows_at_hop, (std::vector<std::uint32_t>{1, 2, 5}));
  EXPECT_EQ(prof.destination_flows, 5u);
}

TEST(Contention, DisjointFlowsDoNotInterfere) {
  const Network net = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  const std::vector<FlowSpec> flows{flow(net, "a", 0, 1), flow(net, "b", 6, 7), flow(net, "c", 12, 13)};
  for (const auto& f : flows) {
    const auto prof = contention_profile(net, flows, f.id);
    EXPECT_EQ(prof.k, 1u);
    EXPECT_EQ(prof.contenders, std::vector<std::uint32_t>{1});
  }
  EXPECT_THROW(contention_profile(net, flows, "zz"), Error);
}

TEST(Contention, InterferenceIsTransitive) {
  // a and c share nothing, but both share a channel with b
  const Network net = build_mesh(3, 1, fill(3, 1), 4, RouterKind::Rts);
  const auto at = [&](int x, Port p) { return net.core_at({{x, 0}, p}); };
  const std::vector<FlowSpec> flows{flow(net, "a", at(0, Port::NE), at(1, Port::NE)),
                                    flow(net, "b", at(0, Port::SE), at(2, Port::NE)),
                                    flow(net, "c", at(1, Port::SE), at(2, Port::SE))};
  EXPECT_EQ(contention_profile(net, flows, "a").k, 3u);
}

TEST(Credits, FlowCreditsCountFlowsPerLinkInput) {
  const Network net = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  const auto plan = flow_credits(net, fig7_flows(net));
  const auto& top_left = plan[net.router_id({0, 1})][index(Port::NN)];
  EXPECT_EQ(top_left.at(Port::SS), 2u);  // s3, s7
  EXPECT_EQ(top_left.at(Port::EE), 2u);  // s18, s23
  EXPECT_EQ(top_left.count(Port::NE), 0u);  // not a priority channel
}

TEST(Credits, TopologyCreditsAreAtLeastOne) {
  const Network net = build_mesh(3, 3, fill(3, 3), 4, RouterKind::Rts);
  const auto plan = topology_credits(net);
  ASSERT_EQ(plan.size(), 9u);
  for (const auto& table : plan) {
    for (const auto& per_out : table) {
      for (const auto& [in, c] : per_out) {
        EXPECT_TRUE(is_priority_channel(in));
        EXPECT_GE(c, 1u);
      }
    }
  }
  // XY turns north only in the destination column, so everything entering the
  // centre from below started in the bottom row
  EXPECT_EQ(plan[net.router_id({1, 1})][index(Port::NN)].at(Port::SS), 3u);
  EXPECT_EQ(plan[net.router_id({1, 1})][index(Port::EE)].at(Port::WW), 1u);
}
