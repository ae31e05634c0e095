#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "rtsnoc/analytics.hpp"
#include "rtsnoc/sim_engine.hpp"

using namespace rtsnoc;

namespace {

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

FlowSpec flow(const Network& net, std::string id, CoreId src, CoreId dst, SizeLaw size, RateLaw rate,
              std::uint64_t base = 0) {
  FlowSpec f;
  f.id = std::move(id);
  f.src = net.core_address(src);
  f.dst = net.core_address(dst);
  f.size = size;
  f.rate = rate;
  f.data_base = base;
  return f;
}

SimConfig fig7_config(Cycle probe_at) {
  SimConfig cfg;
  cfg.network = build_mesh(2, 2, fill(2, 2), 4, RouterKind::Rts);
  const auto& net = cfg.network;
  cfg.flows = {flow(net, "s3", 3, 12, FixedSize{6}, Saturating{0}, 0x830),
               flow(net, "s7", 7, 12, FixedSize{6}, SingleShot{probe_at}, 0x870),
               flow(net, "s13", 13, 12, FixedSize{6}, Saturating{0}, 0x8D0),
               flow(net, "s18", 18, 12, FixedSize{6}, Saturating{0}, 0x8E0),
               flow(net, "s23", 23, 12, FixedSize{6}, Saturating{0}, 0x8F0)};
  cfg.duration = probe_at + 300;
  return cfg;
}

}  // namespace

// Alone in the network a packet needs kForwardDelay per router for its header
// and one grant slot per further flit.
TEST(Engine, LonePacketLatencyMatchesPipelineModel) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 4);
    const int h = 1 + static_cast<int>(rng() % 4);
    SimConfig cfg;
    const auto pl = fill(w, h);
    cfg.network = build_mesh(w, h, pl, 1 + rng() % 6, trial % 2 ? RouterKind::Rts : RouterKind::Wormhole);
    const CoreId a = static_cast<CoreId>(rng() % pl.size());
    CoreId b = a;
    while (b == a) b = static_cast<CoreId>(rng() % pl.size());
    const std::uint32_t f = 1 + rng() % 10;
    cfg.flows = {flow(cfg.network, "x", a, b, FixedSize{f}, SingleShot{static_cast<Cycle>(rng() % 7)})};
    cfg.duration = 200;
    const Metrics m = run(cfg);
    ASSERT_EQ(m.packets.size(), 1u);
    const auto hops = static_cast<Cycle>(xy_path(cfg.network, cfg.flows[0].src, cfg.flows[0].dst).size());
    EXPECT_EQ(m.packets[0].header_latency(), kForwardDelay * hops);
    EXPECT_EQ(m.packets[0].packet_latency(), kForwardDelay * hops + kGrantPeriod * (f - 1));
    EXPECT_TRUE(m.violations.empty());
  }
}

TEST(Engine, Fig7ProbeHitsTheBoundAtTheWorstPhase) {
  const Metrics m = run(fig7_config(102));
  const auto& s = m.flow("s7");
  EXPECT_EQ(s.packets, 1u);
  EXPECT_EQ(s.max_header_latency, 12);
  EXPECT_EQ(s.max_latency, 62);
  EXPECT_TRUE(m.violations.empty());
}

TEST(Engine, Fig7ProbeNeverExceedsTheBound) {
  const SimConfig base = fig7_config(0);
  const auto wcl = wcl_for_flow(base.network, base.flows, "s7");
  for (Cycle at = 60; at < 120; ++at) {
    const Metrics m = run(fig7_config(at));
    EXPECT_LE(m.flow("s7").max_latency, wcl) << "probe released at " << at;
    for (const auto& f : base.flows) {
      EXPECT_LE(m.flow(f.id).max_latency, wcl_for_flow(base.network, base.flows, f.id));
    }
  }
}

TEST(Engine, DeliversEveryFlowInOrder) {
  SimConfig cfg = fig7_config(50);
  cfg.flows[0].size = UniformSize{1, 9};
  cfg.flows[2].rate = Periodic{17, 3};
  cfg.duration = 3000;
  const Metrics m = run(cfg);
  EXPECT_TRUE(m.violations.empty());
  for (const auto& per_flow : m.deliveries) {
    PacketId last_packet = 0;
    std::uint32_t expect = 0;
    for (const auto& d : per_flow) {
      if (d.flit.seq == 0) {
        EXPECT_GE(d.flit.packet, last_packet);
        last_packet = d.flit.packet;
      }
      EXPECT_EQ(d.flit.seq, expect);
      expect = is_tail(d.flit.kind) ? 0 : expect + 1;
    }
  }
}

TEST(Engine, SameSeedSameRun) {
  SimConfig cfg = fig7_config(10);
  for (auto& f : cfg.flows) f.size = UniformSize{1, 12};
  cfg.duration = 2000;
  cfg.seed = 9;
  const Metrics a = run(cfg);
  const Metrics b = run(cfg);
  ASSERT_EQ(a.packets.size(), b.packets.size());
  for (std::size_t i = 0; i < a.packets.size(); ++i) {
    EXPECT_EQ(a.packets[i].packet_latency(), b.packets[i].packet_latency());
    EXPECT_EQ(a.packets[i].f, b.packets[i].f);
  }
  cfg.seed = 10;
  const Metrics c = run(cfg);
  bool differs = c.packets.size() != a.packets.size();
  for (std::size_t i = 0; !differs && i < a.packets.size(); ++i) differs = a.packets[i].f != c.packets[i].f;
  EXPECT_TRUE(differs);
}

TEST(Engine, ChannelThroughputIsOneFlitPerSlot) {
  SimConfig cfg = fig7_config(0);
  cfg.flows.erase(cfg.flows.begin() + 1);  // the four saturating competitors share one channel
  cfg.duration = 4000;
  cfg.record_channels = true;
  const Metrics m = run(cfg);
  double total = 0;
  for (const auto& s : m.flows) total += s.throughput;
  EXPECT_NEAR(total, 1.0 / kGrantPeriod, 0.01);
  for (const auto& [key, times] : m.channels) {
    for (std::size_t i = 1; i < times.size(); ++i) EXPECT_GE(times[i] - times[i - 1], kGrantPeriod);
  }
}

TEST(Engine, LoneFlowKeepsOnePacketInFlight) {
  SimConfig cfg = fig7_config(0);
  cfg.flows = {cfg.flows[0]};
  cfg.duration = 4000;
  const Metrics m = run(cfg);
  // the next header waits for the previous tail, then for the next grant slot
  const auto hops = static_cast<double>(xy_path(cfg.network, cfg.flows[0].src, cfg.flows[0].dst).size());
  const double period = kForwardDelay * hops + kGrantPeriod * 5 + kGrantPeriod;
  EXPECT_NEAR(m.flow("s3").throughput, 6.0 / period, 0.01);
}

TEST(Engine, SlowReaderThrottlesButLosesNothing) {
  SimConfig cfg = fig7_config(0);
  cfg.flows = {cfg.flows[0], cfg.flows[2]};
  cfg.rx_drain_interval = 5;
  cfg.duration = 5000;
  const Metrics m = run(cfg);
  EXPECT_TRUE(m.violations.empty());
  const double total = m.flow("s3").throughput + m.flow("s13").throughput;
  EXPECT_NEAR(total, 1.0 / 5.0, 0.01);
}

TEST(Engine, ConfigValidation) {
  SimConfig cfg = fig7_config(0);
  cfg.duration = 0;
  EXPECT_THROW(run(cfg), Error);
  cfg.duration = 10;
  cfg.clock_ns = 0;
  EXPECT_THROW(run(cfg), Error);
  cfg.clock_ns = 10;
  cfg.rx_drain_interval = 0;
  EXPECT_THROW(run(cfg), Error);
  cfg.rx_drain_interval = 1;
  cfg.flows[0].rate = Periodic{0, 0};
  EXPECT_THROW(run(cfg), Error);
  cfg.flows[0].rate = Saturating{};
  cfg.flows[0].size = UniformSize{3, 2};
  EXPECT_THROW(run(cfg), Error);
}

TEST(Rng, BoundedDrawStaysInRange) {
  Rng rng(1);
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.between(3, 7);
    ASSERT_GE(v, 3u);
    ASSERT_LE(v, 7u);
    ++seen[v];
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
}

TEST(Sweep, LatencyStaysWithinTheBoundAtEveryLoad) {
  SimConfig cfg = fig7_config(0);
  cfg.flows[1].rate = Saturating{0};
  cfg.duration = 3000;
  const auto wcl = wcl_for_flow(cfg.network, cfg.flows, "s7");
  const auto rows = offered_load_sweep(cfg, "s7", {0.0, 0.2, 0.5, 0.8});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].competitor_throughput, 0.0);
  EXPECT_EQ(rows[0].max_latency, kForwardDelay * 3 + kGrantPeriod * 5);
  for (const auto& r : rows) {
    EXPECT_GT(r.packets, 0u);
    EXPECT_LE(r.max_latency, wcl);
    EXPECT_GE(r.avg_latency, rows[0].avg_latency);
  }
  EXPECT_THROW(offered_load_sweep(cfg, "s7", {1.5}), Error);
  EXPECT_THROW(offered_load_sweep(cfg, "nope", {0.1}), Error);
}
