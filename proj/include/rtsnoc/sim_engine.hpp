#pragma once

// Cycle-driven simulation kernel.
//
// Every cycle runs in the same order:
//   1. flows release packets according to their rate laws;
//   2. each core writes at most one flit of its current packet into its tx FIFO;
//   3. every output channel decides its grant from the state at the start of
//      the cycle. An output whose buffer is full can only grant if that flit is
//      itself taken downstream, so decisions are resolved along the traffic
//      direction; XY routes keep that dependency acyclic;
//   4. all decisions are committed at once: granted flits move into output
//      buffers, and flits leaving towards a core are written into its rx FIFO,
//      which is where a flit counts as delivered;
//   5. destination cores drain their rx FIFOs.
//
// A flow keeps at most one packet in the network: its next header waits at
// the head of the tx FIFO until the previous tail has been delivered.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "rtsnoc/core_model.hpp"
#include "rtsnoc/error.hpp"
#include "rtsnoc/network.hpp"
#include "rtsnoc/router.hpp"

namespace rtsnoc {

struct SimConfig {
  Network network;
  std::vector<FlowSpec> flows;
  Cycle duration = 0;
  std::uint64_t seed = 0;
  double clock_ns = 10.0;
  // Destination cores read one flit every rx_drain_interval cycles.
  Cycle rx_drain_interval = 1;
  unsigned data_bits = 16;
  // Arbiter credits; derived from the flow set when absent.
  std::optional<CreditPlan> credits;
  // Keep per-channel flit timestamps (costly on long runs).
  bool record_channels = false;
};

struct PacketRecord {
  FlowIndex flow = 0;
  PacketId packet = 0;
  std::uint32_t f = 0;
  Cycle release_cycle = 0;         // handed to the interface by the rate law
  Cycle inject_cycle = 0;          // header entered the first router
  Cycle header_arrival_cycle = 0;  // header delivered to the destination
  Cycle tail_departure_cycle = 0;  // tail delivered to the destination
  Cycle header_latency() const { return header_arrival_cycle - inject_cycle; }
  Cycle packet_latency() const { return tail_departure_cycle - inject_cycle; }
};

struct Delivery {
  Cycle cycle = 0;
  Flit flit;
};

struct FlowStats {
  std::string id;
  std::size_t packets = 0;
  std::size_t flits = 0;
  double avg_latency = 0.0;
  Cycle max_latency = 0;
  Cycle max_header_latency = 0;
  double throughput = 0.0;  // delivered flits per cycle
};

struct ChannelKey {
  std::size_t router = 0;
  Port output = Port::NN;
  friend auto operator<=>(const ChannelKey&, const ChannelKey&) = default;
};

struct Metrics {
  Cycle duration = 0;
  std::vector<PacketRecord> packets;                   // in completion order
  std::vector<std::vector<Delivery>> deliveries;       // per flow, in arrival order
  std::map<ChannelKey, std::vector<Cycle>> channels;   // when record_channels is set
  std::vector<FlowStats> flows;
  std::uint64_t injected_flits = 0;
  std::uint64_t delivered_flits = 0;
  std::vector<std::string> violations;                 // conservation / ordering breaches

  const FlowStats& flow(const std::string& id) const {
    for (const auto& s : flows) {
      if (s.id == id) return s;
    }
    throw Error(ErrorKind::Lookup, "no statistics for flow " + id);
  }
};

/// Deterministic 64-bit stream with an unbiased bounded draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    if (span == 0) return engine_();
    const std::uint64_t limit = ~0ULL - (~0ULL % span);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + x % span;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

struct PendingPacket {
  FlowIndex flow = 0;
  Cycle release = 0;
  std::uint32_t f = 0;
};

class FlowSource {
 public:
  FlowSource(const FlowSpec& spec, std::uint64_t seed) : spec_(&spec), rng_(seed) {}

  /// Releases the packets that become due at cycle t.
  void release(Cycle t, FlowIndex index, std::deque<PendingPacket>& backlog) {
    const auto emit = [&] { backlog.push_back({index, t, draw_size()}); };
    std::visit(
        [&](const auto& law) {
          using Law = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<Law, Saturating>) {
            if (t >= law.start && outstanding_ == 0) {
              emit();
              ++outstanding_;
            }
          } else if constexpr (std::is_same_v<Law, Periodic>) {
            if (t >= law.phase && (t - law.phase) % law.period == 0) emit();
          } else {
            if (t == law.at) emit();
          }
        },
        spec_->rate);
  }

  /// A saturating flow refills once its previous packet has entered the tx FIFO.
  void packet_taken() {
    if (outstanding_ > 0) --outstanding_;
  }

 private:
  std::uint32_t draw_size() {
    if (const auto* fixed = std::get_if<FixedSize>(&spec_->size)) return fixed->flits;
    const auto& range = std::get<UniformSize>(spec_->size);
    return static_cast<std::uint32_t>(rng_.between(range.min_flits, range.max_flits));
  }

  const FlowSpec* spec_;
  Rng rng_;
  int outstanding_ = 0;
};

struct CoreInterface {
  Address address;
  std::vector<FlowIndex> flows;         // flows sourced here
  std::deque<PendingPacket> backlog;    // released, not yet written
  std::optional<Packet> writing;        // packet being copied into tx
  std::size_t written = 0;
  std::deque<Flit> tx;
  std::deque<Flit> rx;
};

}  // namespace detail

inline void validate(const SimConfig& cfg) {
  if (cfg.duration <= 0) throw Error(ErrorKind::Configuration, "duration must be positive");
  if (cfg.clock_ns <= 0) throw Error(ErrorKind::Configuration, "clock period must be positive");
  if (cfg.rx_drain_interval < 1) throw Error(ErrorKind::Configuration, "rx drain interval must be >= 1");
  for (const auto& flow : cfg.flows) {
    validate(flow.size);
    if (const auto* p = std::get_if<Periodic>(&flow.rate); p && (p->period < 1 || p->phase < 0)) {
      throw Error(ErrorKind::Configuration, "flow " + flow.id + " has a non-positive period");
    }
    xy_path(cfg.network, flow.src, flow.dst);
  }
}

namespace detail {

template <class Router>
class Engine {
 public:
  Engine(const SimConfig& cfg, std::vector<Router> routers)
      : cfg_(cfg), net_(cfg.network), routers_(std::move(routers)) {
    interface_at_.assign(net_.router_count() * kPortCount, kNone);
    for (const auto& [core, addr] : net_.cores()) {
      CoreInterface ni;
      ni.address = addr;
      interface_at_[key(addr)] = interfaces_.size();
      interfaces_.push_back(std::move(ni));
    }
    for (FlowIndex i = 0; i < cfg.flows.size(); ++i) {
      const auto& flow = cfg.flows[i];
      sources_.emplace_back(flow, mix_seed(cfg.seed, i));
      interfaces_[interface_at_[key(flow.src)]].flows.push_back(i);
    }
    in_flight_.assign(cfg.flows.size(), false);
    next_seq_.assign(cfg.flows.size(), 0);
    grant_.assign(net_.router_count() * kPortCount, {});
    metrics_.duration = cfg.duration;
    metrics_.deliveries.resize(cfg.flows.size());
  }

  Metrics run() {
    for (Cycle t = 0; t < cfg_.duration; ++t) step(t);
    summarize();
    return std::move(metrics_);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  enum class Mark : std::uint8_t { Unvisited, Visiting, Done };
  struct GrantMemo {
    Mark mark = Mark::Unvisited;
    std::optional<Port> winner;
  };

  std::size_t key(const Address& a) const { return net_.router_id(a.router) * kPortCount + index(a.port); }
  std::size_t key(std::size_t r, Port p) const { return r * kPortCount + index(p); }

  void step(Cycle t) {
    for (FlowIndex i = 0; i < sources_.size(); ++i) {
      sources_[i].release(t, i, interfaces_[interface_at_[key(cfg_.flows[i].src)]].backlog);
    }
    for (auto& ni : interfaces_) write_tx(ni);

    // Resolve every output's grant from start-of-cycle state, then commit.
    for (auto& g : grant_) g = {};
    now_ = t;
    for (std::size_t r = 0; r < routers_.size(); ++r) {
      for (Port o : kAllPorts) resolve(r, o);
    }
    std::vector<std::pair<std::size_t, Port>> departing;
    for (std::size_t r = 0; r < routers_.size(); ++r) {
      for (Port o : kAllPorts) {
        if (leaves(r, o)) departing.emplace_back(r, o);
      }
    }
    std::vector<std::tuple<std::size_t, Port, Flit>> arriving;
    for (std::size_t r = 0; r < routers_.size(); ++r) {
      const Coord c = net_.coord_of(r);
      for (Port o : kAllPorts) {
        const auto& winner = grant_[key(r, o)].winner;
        if (!winner) continue;
        if (net_.attachment(c, *winner).use == PortUse::Link) {
          const Coord up = Network::neighbour(c, *winner);
          arriving.emplace_back(r, o, routers_[net_.router_id(up)].take(opposite(*winner)));
        } else {
          auto& ni = interfaces_[interface_at_[key(r, *winner)]];
          Flit flit = ni.tx.front();
          ni.tx.pop_front();
          if (is_header(flit.kind)) {
            in_flight_[flit.flow] = true;
            open_.at(flit.packet).inject_cycle = t;
          }
          ++metrics_.injected_flits;
          arriving.emplace_back(r, o, std::move(flit));
        }
      }
    }
    for (const auto& [r, o] : departing) {
      if (cfg_.record_channels) metrics_.channels[{r, o}].push_back(t);
      if (net_.attachment(net_.coord_of(r), o).use == PortUse::Core) {
        deliver(interfaces_[interface_at_[key(r, o)]], routers_[r].take(o), t);
      }
    }
    for (auto& [r, o, flit] : arriving) routers_[r].load(o, std::move(flit), t);

    if (t % cfg_.rx_drain_interval == 0) {
      for (auto& ni : interfaces_) {
        if (!ni.rx.empty()) ni.rx.pop_front();
      }
    }
    check_conservation(t);
  }

  /// Flit offered to router r on input p at the current cycle.
  std::optional<Flit> offered(std::size_t r, Port p) const {
    const Coord c = net_.coord_of(r);
    const auto& att = net_.attachment(c, p);
    if (att.use == PortUse::Link) {
      const auto& up = routers_[net_.router_id(Network::neighbour(c, p))];
      if (up.presenting(opposite(p), now_)) return up.buffered(opposite(p));
      return std::nullopt;
    }
    if (att.use == PortUse::Core) {
      const auto& ni = interfaces_[interface_at_[key(r, p)]];
      if (ni.tx.empty()) return std::nullopt;
      const Flit& head = ni.tx.front();
      if (is_header(head.kind) && in_flight_[head.flow]) return std::nullopt;
      return head;
    }
    return std::nullopt;
  }

  /// The flit buffered on (r, o) leaves this cycle.
  bool leaves(std::size_t r, Port o) {
    auto& router = routers_[r];
    if (!router.presenting(o, now_)) return false;
    const Coord c = net_.coord_of(r);
    if (net_.attachment(c, o).use == PortUse::Core) {
      return interfaces_[interface_at_[key(r, o)]].rx.size() < net_.fifo_depth();
    }
    const Coord down = Network::neighbour(c, o);
    const std::size_t d = net_.router_id(down);
    const Port next = xy_route(down, router.buffered(o)->dst);
    const auto& winner = resolve(d, next);
    return winner && *winner == opposite(o);
  }

  const std::optional<Port>& resolve(std::size_t r, Port o) {
    auto& memo = grant_[key(r, o)];
    if (memo.mark == Mark::Done) return memo.winner;
    if (memo.mark == Mark::Visiting) {
      throw Error(ErrorKind::Protocol, "cyclic channel dependency at router " + std::to_string(r));
    }
    memo.mark = Mark::Visiting;
    std::optional<Port> winner;
    if (is_grant_slot(now_) && net_.attachment(net_.coord_of(r), o).use != PortUse::Unused) {
      PortFlits offers{};
      bool any = false;
      for (Port p : kAllPorts) {
        if (p == o) continue;
        offers[index(p)] = offered(r, p);
        any = any || offers[index(p)].has_value();
      }
      if (any) {
        const bool buffer_leaves = routers_[r].buffered(o).has_value() && leaves(r, o);
        winner = routers_[r].arbitrate(now_, o, offers, buffer_leaves);
      }
    }
    auto& done = grant_[key(r, o)];
    done.mark = Mark::Done;
    done.winner = winner;
    return done.winner;
  }

  void write_tx(CoreInterface& ni) {
    if (!ni.writing && !ni.backlog.empty()) {
      const PendingPacket next = ni.backlog.front();
      ni.backlog.pop_front();
      sources_[next.flow].packet_taken();
      Packet p = make_packet(cfg_.flows[next.flow], next.f, next.release, cfg_.data_bits);
      p.id = next_packet_id_++;
      for (auto& flit : p.flits) {
        flit.flow = next.flow;
        flit.packet = p.id;
      }
      PacketRecord rec;
      rec.flow = next.flow;
      rec.packet = p.id;
      rec.release_cycle = next.release;
      open_[p.id] = rec;
      ni.writing = std::move(p);
      ni.written = 0;
    }
    if (ni.writing && ni.tx.size() < net_.fifo_depth()) {
      ni.tx.push_back(ni.writing->flits[ni.written++]);
      if (ni.written == ni.writing->flits.size()) ni.writing.reset();
    }
  }

  void deliver(CoreInterface& ni, const Flit& flit, Cycle t) {
    ni.rx.push_back(flit);
    ++metrics_.delivered_flits;
    metrics_.deliveries[flit.flow].push_back({t, flit});

    auto& expect = next_seq_[flit.flow];
    if (flit.seq != expect) {
      metrics_.violations.push_back("flow " + cfg_.flows[flit.flow].id + " delivered seq " +
                                    std::to_string(flit.seq) + " out of order at cycle " + std::to_string(t));
    }
    expect = is_tail(flit.kind) ? 0 : flit.seq + 1;

    auto it = open_.find(flit.packet);
    if (it == open_.end()) {
      metrics_.violations.push_back("flit of unknown packet delivered at cycle " + std::to_string(t));
      return;
    }
    if (is_header(flit.kind)) it->second.header_arrival_cycle = t;
    if (is_tail(flit.kind)) {
      PacketRecord rec = it->second;
      rec.tail_departure_cycle = t;
      rec.f = flit.seq + 1;
      open_.erase(it);
      in_flight_[flit.flow] = false;
      metrics_.packets.push_back(rec);
    }
  }

  void check_conservation(Cycle t) {
    std::uint64_t held = 0;
    for (const auto& r : routers_) held += r.occupancy();
    // injected counts flits that left a tx FIFO; delivered counts rx writes
    if (metrics_.injected_flits != metrics_.delivered_flits + held) {
      metrics_.violations.push_back("flit conservation broken at cycle " + std::to_string(t));
    }
  }

  void summarize() {
    for (FlowIndex i = 0; i < cfg_.flows.size(); ++i) {
      FlowStats s;
      s.id = cfg_.flows[i].id;
      s.flits = metrics_.deliveries[i].size();
      s.throughput = static_cast<double>(s.flits) / static_cast<double>(cfg_.duration);
      metrics_.flows.push_back(s);
    }
    std::vector<double> sum(cfg_.flows.size(), 0.0);
    for (const auto& rec : metrics_.packets) {
      auto& s = metrics_.flows[rec.flow];
      ++s.packets;
      sum[rec.flow] += static_cast<double>(rec.packet_latency());
      s.max_latency = std::max(s.max_latency, rec.packet_latency());
      s.max_header_latency = std::max(s.max_header_latency, rec.header_latency());
    }
    for (FlowIndex i = 0; i < cfg_.flows.size(); ++i) {
      auto& s = metrics_.flows[i];
      if (s.packets > 0) s.avg_latency = sum[i] / static_cast<double>(s.packets);
    }
  }

  const SimConfig& cfg_;
  const Network& net_;
  std::vector<Router> routers_;
  std::vector<CoreInterface> interfaces_;
  std::vector<std::size_t> interface_at_;
  std::vector<FlowSource> sources_;
  std::vector<bool> in_flight_;
  std::vector<std::uint32_t> next_seq_;
  std::vector<GrantMemo> grant_;
  std::map<PacketId, PacketRecord> open_;
  PacketId next_packet_id_ = 0;
  Cycle now_ = 0;
  Metrics metrics_;
};

}  // namespace detail

inline Metrics run(const SimConfig& cfg) {
  validate(cfg);
  const Network& net = cfg.network;
  if (net.router_kind() == RouterKind::Rts) {
    const CreditPlan credits = cfg.credits ? *cfg.credits : flow_credits(net, cfg.flows);
    std::vector<RtsRouter> routers;
    for (std::size_t r = 0; r < net.router_count(); ++r) {
      const Coord c = net.coord_of(r);
      routers.emplace_back(c, net.router_ports(c), credits.at(r));
    }
    return detail::Engine<RtsRouter>(cfg, std::move(routers)).run();
  }
  std::vector<WormholeRouter> routers;
  for (std::size_t r = 0; r < net.router_count(); ++r) {
    const Coord c = net.coord_of(r);
    routers.emplace_back(c, net.router_ports(c));
  }
  return detail::Engine<WormholeRouter>(cfg, std::move(routers)).run();
}

struct SweepRow {
  double offered_load = 0.0;
  double avg_latency = 0.0;
  Cycle max_latency = 0;
  std::size_t packets = 0;
  double throughput = 0.0;             // the target's delivered flits per cycle
  double competitor_throughput = 0.0;  // achieved, flits per cycle on the shared channel
  bool unreachable = false;
};

/// Competitors of `target` are paced so that together they offer `load` of a
/// channel's capacity (one flit per grant slot). Load 0 removes them.
inline std::vector<SweepRow> offered_load_sweep(const SimConfig& base, const std::string& target,
                                                const std::vector<double>& loads) {
  find_flow(base.flows, target);
  const double capacity = 1.0 / static_cast<double>(kGrantPeriod);
  std::vector<SweepRow> rows;
  for (double load : loads) {
    if (load < 0.0 || load > 1.0) throw Error(ErrorKind::Domain, "load points must lie in [0, 1]");
    SimConfig cfg = base;
    cfg.flows.clear();
    std::vector<const FlowSpec*> competitors;
    for (const auto& f : base.flows) {
      if (f.id == target) {
        cfg.flows.push_back(f);
      } else {
        competitors.push_back(&f);
      }
    }
    if (load > 0.0) {
      const double m = static_cast<double>(competitors.size());
      for (std::size_t i = 0; i < competitors.size(); ++i) {
        FlowSpec f = *competitors[i];
        double mean = 1.0;
        if (const auto* fixed = std::get_if<FixedSize>(&f.size)) {
          mean = fixed->flits;
        } else {
          const auto& u = std::get<UniformSize>(f.size);
          mean = (u.min_flits + u.max_flits) / 2.0;
        }
        const Cycle period = std::max<Cycle>(1, static_cast<Cycle>(m * mean / (load * capacity) + 0.5));
        f.rate = Periodic{period, static_cast<Cycle>(i) * period / static_cast<Cycle>(competitors.size())};
        cfg.flows.push_back(f);
      }
    }
    const Metrics m = run(cfg);
    SweepRow row;
    row.offered_load = load;
    const auto& s = m.flow(target);
    row.avg_latency = s.avg_latency;
    row.max_latency = s.max_latency;
    row.packets = s.packets;
    row.throughput = s.throughput;
    for (const auto& fs : m.flows) {
      if (fs.id != target) row.competitor_throughput += fs.throughput;
    }
    row.unreachable = load > 0.0 && row.competitor_throughput < 0.95 * load * capacity;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rtsnoc
