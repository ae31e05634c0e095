#pragma once

// 2-D mesh topologies: routers, inter-router links, core attachment points,
// and the structural contention parameters the latency model needs.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtsnoc/core_model.hpp"
#include "rtsnoc/error.hpp"
#include "rtsnoc/router.hpp"
#include "rtsnoc/routing_arbitration.hpp"

namespace rtsnoc {

using CoreId = int;

enum class PortUse : std::uint8_t { Unused, Link, Core };

struct PortAttachment {
  PortUse use = PortUse::Unused;
  CoreId core = -1;  // valid when use == Core
};

struct Placement {
  CoreId core = 0;
  Address address;
};

class Network {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t fifo_depth() const { return fifo_depth_; }
  RouterKind router_kind() const { return kind_; }
  std::size_t router_count() const { return static_cast<std::size_t>(width_ * height_); }

  bool contains(Coord c) const { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }

  /// Routers are numbered row by row: id = y * width + x.
  std::size_t router_id(Coord c) const { return static_cast<std::size_t>(c.y * width_ + c.x); }
  Coord coord_of(std::size_t id) const {
    return {static_cast<int>(id) % width_, static_cast<int>(id) / width_};
  }

  PortSet router_ports(Coord) const { return PortSet{Port::NN, Port::NE, Port::EE, Port::SE, Port::SS, Port::SW, Port::WW, Port::NW}; }

  const PortAttachment& attachment(Coord c, Port p) const { return ports_[router_id(c)][index(p)]; }
  bool is_link(Coord c, Port p) const { return attachment(c, p).use == PortUse::Link; }

  /// Router reached through link port `p` of `c`.
  static Coord neighbour(Coord c, Port p) {
    switch (p) {
      case Port::EE: return {c.x + 1, c.y};
      case Port::WW: return {c.x - 1, c.y};
      case Port::NN: return {c.x, c.y + 1};
      case Port::SS: return {c.x, c.y - 1};
      default: return c;
    }
  }

  const std::map<CoreId, Address>& cores() const { return cores_; }

  const Address& core_address(CoreId id) const {
    auto it = cores_.find(id);
    if (it == cores_.end()) throw Error(ErrorKind::Lookup, "no core with id " + std::to_string(id));
    return it->second;
  }

  bool is_core(const Address& a) const {
    return contains(a.router) && attachment(a.router, a.port).use == PortUse::Core;
  }

  CoreId core_at(const Address& a) const {
    if (!is_core(a)) throw Error(ErrorKind::Lookup, "no core attached at " + to_string(a));
    return attachment(a.router, a.port).core;
  }

  FlitLayout layout(unsigned data_bits = 16) const { return {width_, height_, data_bits}; }

 private:
  friend Network build_mesh(int, int, const std::vector<Placement>&, std::size_t, RouterKind);

  int width_ = 1;
  int height_ = 1;
  std::size_t fifo_depth_ = 1;
  RouterKind kind_ = RouterKind::Rts;
  std::vector<std::array<PortAttachment, kPortCount>> ports_;
  std::map<CoreId, Address> cores_;
};

inline Network build_mesh(int width, int height, const std::vector<Placement>& placements,
                          std::size_t fifo_depth, RouterKind kind) {
  if (width < 1 || height < 1) throw Error(ErrorKind::Configuration, "mesh dimensions must be positive");
  if (fifo_depth < 1) throw Error(ErrorKind::Configuration, "interface FIFO depth B must be >= 1");
  Network net;
  net.width_ = width;
  net.height_ = height;
  net.fifo_depth_ = fifo_depth;
  net.kind_ = kind;
  net.ports_.assign(net.router_count(), {});
  for (std::size_t id = 0; id < net.router_count(); ++id) {
    const Coord c = net.coord_of(id);
    auto& ports = net.ports_[id];
    if (c.x + 1 < width) ports[index(Port::EE)].use = PortUse::Link;
    if (c.x > 0) ports[index(Port::WW)].use = PortUse::Link;
    if (c.y + 1 < height) ports[index(Port::NN)].use = PortUse::Link;
    if (c.y > 0) ports[index(Port::SS)].use = PortUse::Link;
  }
  for (const auto& pl : placements) {
    const Address& a = pl.address;
    if (!net.contains(a.router)) {
      throw Error(ErrorKind::Bounds, "core " + std::to_string(pl.core) + " placed outside the mesh at " +
                                         to_string(a));
    }
    auto& slot = net.ports_[net.router_id(a.router)][index(a.port)];
    if (slot.use == PortUse::Link) {
      throw Error(ErrorKind::Placement, "core " + std::to_string(pl.core) +
                                            " placed on inter-router port " + to_string(a));
    }
    if (slot.use == PortUse::Core) {
      throw Error(ErrorKind::Placement, "address " + to_string(a) + " already hosts core " +
                                            std::to_string(slot.core));
    }
    if (net.cores_.count(pl.core) != 0) {
      throw Error(ErrorKind::Placement, "core id " + std::to_string(pl.core) + " placed twice");
    }
    slot.use = PortUse::Core;
    slot.core = pl.core;
    net.cores_.emplace(pl.core, a);
  }
  return net;
}

/// One arbitration point of a path: the flit enters `router` on `input` and leaves on `output`.
struct Hop {
  Coord router;
  Port input = Port::NN;
  Port output = Port::NN;
  friend bool operator==(const Hop&, const Hop&) = default;
};

/// Walks the XY route without checking attachments.
inline std::vector<Hop> xy_walk(Coord from, Port first_input, const Address& dst) {
  std::vector<Hop> path;
  Coord at = from;
  Port in = first_input;
  for (;;) {
    const Port out = xy_route(at, dst);
    path.push_back({at, in, out});
    if (at == dst.router) break;
    at = Network::neighbour(at, out);
    in = opposite(out);
  }
  return path;
}

inline std::vector<Hop> xy_path(const Network& net, const Address& src, const Address& dst) {
  if (!net.is_core(src)) throw Error(ErrorKind::Lookup, "source " + to_string(src) + " has no core");
  if (!net.is_core(dst)) throw Error(ErrorKind::Lookup, "destination " + to_string(dst) + " has no core");
  if (src == dst) throw Error(ErrorKind::Lookup, "source and destination are the same core");
  return xy_walk(src.router, src.port, dst);
}

/// Per-output credit tables, indexed by router id.
using CreditPlan = std::vector<RtsRouter::CreditTable>;

/// Default credits from topology alone: the number of source routers whose XY
/// traffic can enter each router on a link and leave on a given output.
inline CreditPlan topology_credits(const Network& net) {
  std::vector<std::array<std::array<std::set<std::size_t>, kPortCount>, kPortCount>> sources(
      net.router_count());
  for (std::size_t s = 0; s < net.router_count(); ++s) {
    for (std::size_t d = 0; d < net.router_count(); ++d) {
      if (s == d) continue;
      const Coord from = net.coord_of(s);
      const Coord to = net.coord_of(d);
      // Any local port works as the entry point; only the link hops matter here.
      for (Port local : kAllPorts) {
        if (net.attachment(to, local).use == PortUse::Link) continue;
        const auto path = xy_walk(from, Port::NE, Address{to, local});
        for (std::size_t i = 1; i < path.size(); ++i) {
          const Hop& h = path[i];
          sources[net.router_id(h.router)][index(h.output)][index(h.input)].insert(s);
        }
      }
    }
  }
  CreditPlan plan(net.router_count());
  for (std::size_t r = 0; r < net.router_count(); ++r) {
    for (Port o : kAllPorts) {
      for (Port in : kAllPorts) {
        if (!is_priority_channel(in)) continue;
        const auto n = sources[r][index(o)][index(in)].size();
        plan[r][index(o)][in] = static_cast<std::uint32_t>(std::max<std::size_t>(1, n));
      }
    }
  }
  return plan;
}

/// Credits from a known flow set: the number of flows that cross each
/// input -> output pair of each router.
inline CreditPlan flow_credits(const Network& net, const std::vector<FlowSpec>& flows) {
  CreditPlan plan(net.router_count());
  for (const auto& flow : flows) {
    for (const Hop& h : xy_path(net, flow.src, flow.dst)) {
      if (!is_priority_channel(h.input)) continue;
      ++plan[net.router_id(h.router)][index(h.output)][h.input];
    }
  }
  return plan;
}

struct ContentionProfile {
  std::vector<Hop> path;
  std::vector<std::uint32_t> contenders;    // N_i: input channels feeding hop i's output
  std::vector<std::uint32_t> flows_at_hop;  // flows sharing hop i's output
  // Flows that can hold the target back: everything connected to it through
  // chains of shared output channels, the target included.
  std::uint32_t k = 1;
  std::uint32_t destination_flows = 1;      // flows addressing the target's destination
  std::uint32_t h_path() const { return static_cast<std::uint32_t>(path.size()); }
};

inline const FlowSpec& find_flow(const std::vector<FlowSpec>& flows, const std::string& id) {
  auto it = std::find_if(flows.begin(), flows.end(), [&](const FlowSpec& f) { return f.id == id; });
  if (it == flows.end()) throw Error(ErrorKind::Lookup, "no flow named " + id);
  return *it;
}

inline ContentionProfile contention_profile(const Network& net, const std::vector<FlowSpec>& flows,
                                            const std::string& target) {
  const FlowSpec& t = find_flow(flows, target);
  ContentionProfile prof;
  prof.path = xy_path(net, t.src, t.dst);

  using Channel = std::pair<std::size_t, std::size_t>;  // (router id, output)
  struct Use {
    PortSet inputs;
    std::vector<std::size_t> flows;
  };
  std::map<Channel, Use> use;
  std::vector<std::vector<Channel>> channels(flows.size());
  std::size_t target_index = 0;
  std::uint32_t to_dst = 0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    if (&f == &t) target_index = i;
    for (const Hop& h : xy_path(net, f.src, f.dst)) {
      const Channel ch{net.router_id(h.router), index(h.output)};
      auto& u = use[ch];
      u.inputs.insert(h.input);
      u.flows.push_back(i);
      channels[i].push_back(ch);
    }
    if (f.dst == t.dst) ++to_dst;
  }
  for (const Hop& h : prof.path) {
    const auto& u = use.at({net.router_id(h.router), index(h.output)});
    prof.contenders.push_back(static_cast<std::uint32_t>(u.inputs.size()));
    prof.flows_at_hop.push_back(static_cast<std::uint32_t>(u.flows.size()));
  }

  std::vector<bool> reached(flows.size(), false);
  std::vector<std::size_t> frontier{target_index};
  reached[target_index] = true;
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    for (const auto& ch : channels[i]) {
      for (std::size_t j : use.at(ch).flows) {
        if (!reached[j]) {
          reached[j] = true;
          frontier.push_back(j);
        }
      }
    }
  }
  prof.k = static_cast<std::uint32_t>(std::count(reached.begin(), reached.end(), true));
  prof.destination_flows = std::max<std::uint32_t>(1, to_dst);
  return prof;
}

}  // namespace rtsnoc
