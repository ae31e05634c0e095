#pragma once

// Cycle-level router models.
//
// A router stores flits only in its single-flit output buffers. An input has no
// storage of its own: it sees the flit offered by the upstream output buffer
// (or by a core interface), and a grant moves that flit straight into this
// router's output buffer, freeing the upstream buffer in the same cycle. The
// flit becomes visible downstream kForwardDelay cycles after its grant.
//
// Grants happen only on slot boundaries, one slot every kGrantPeriod cycles.
// An output may grant on a slot if its buffer is empty or if the buffered flit
// leaves in that same slot, so a busy chain moves one flit per slot per hop.
//
// Whether a buffered flit leaves depends on what the next router grants, so a
// network resolves grants channel by channel along the flow of traffic (see
// sim_engine); a standalone router is driven through cycle().

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "rtsnoc/core_model.hpp"
#include "rtsnoc/error.hpp"
#include "rtsnoc/routing_arbitration.hpp"

namespace rtsnoc {

inline constexpr Cycle kForwardDelay = 2;
inline constexpr Cycle kGrantPeriod = 2;

constexpr bool is_grant_slot(Cycle t) { return t % kGrantPeriod == 0; }

using PortFlits = std::array<std::optional<Flit>, kPortCount>;
using PortFlags = std::array<bool, kPortCount>;

inline constexpr std::size_t kMinRouterPorts = 5;

enum class RouterKind { Rts, Wormhole };

constexpr std::string_view to_string(RouterKind k) { return k == RouterKind::Rts ? "rts" : "wormhole"; }

/// Result of one standalone router cycle.
struct RouterStep {
  PortFlits outgoing{};  // flits leaving on each output
  PortSet consumed;      // inputs whose offered flit was taken
};

namespace detail {

struct OutputBuffer {
  std::optional<Flit> flit;
  Cycle ready_at = 0;
};

/// Output buffers and the routing checks shared by both router kinds.
class RouterBase {
 public:
  RouterBase(Coord coord, PortSet ports) : coord_(coord), ports_(ports) {
    if (ports.size() < kMinRouterPorts) {
      throw Error(ErrorKind::Configuration, "a router needs between 5 and 8 ports");
    }
  }

  Coord coord() const { return coord_; }
  PortSet ports() const { return ports_; }

  const std::optional<Flit>& buffered(Port out) const { return out_[index(out)].flit; }

  /// The buffered flit of `out` is offered downstream at cycle t.
  bool presenting(Port out, Cycle t) const {
    const auto& buf = out_[index(out)];
    return buf.flit.has_value() && t >= buf.ready_at;
  }

  std::size_t occupancy() const {
    std::size_t n = 0;
    for (const auto& buf : out_) n += buf.flit.has_value() ? 1 : 0;
    return n;
  }

  /// Removes the flit leaving on `out`.
  Flit take(Port out) {
    auto& buf = out_[index(out)];
    if (!buf.flit) throw Error(ErrorKind::Protocol, "no flit buffered on " + std::string(to_string(out)));
    Flit flit = std::move(*buf.flit);
    buf.flit.reset();
    return flit;
  }

  /// Stores a granted flit; it is offered downstream kForwardDelay cycles later.
  void load(Port out, Flit flit, Cycle t) {
    auto& buf = out_[index(out)];
    if (buf.flit) {
      throw Error(ErrorKind::Protocol, "output " + std::string(to_string(out)) + " buffer overrun");
    }
    buf.flit = std::move(flit);
    buf.ready_at = t + kForwardDelay;
  }

 protected:
  /// Inputs offering a flit that routes to `out`.
  PortSet requests_for(Port out, const PortFlits& offered) const {
    PortSet req;
    for (Port p : kAllPorts) {
      const auto& flit = offered[index(p)];
      if (!flit) continue;
      if (!ports_.contains(p)) {
        throw Error(ErrorKind::Topology, "flit offered on unconfigured port " + std::string(to_string(p)));
      }
      const Port route = xy_route(coord_, flit->dst);
      if (!ports_.contains(route)) {
        throw Error(ErrorKind::Topology, "flit for " + to_string(flit->dst) + " routes to unconfigured port " +
                                             std::string(to_string(route)));
      }
      if (route == out && p != out) req.insert(p);
    }
    return req;
  }

  bool may_grant(Port out, Cycle t, bool buffer_leaves) const {
    return is_grant_slot(t) && ports_.contains(out) && (!out_[index(out)].flit || buffer_leaves);
  }

  template <class Self>
  static RouterStep run_cycle(Self& self, Cycle t, const PortFlits& offered, const PortFlags& downstream_ready) {
    RouterStep step;
    PortFlags leaves{};
    for (Port o : kAllPorts) leaves[index(o)] = self.presenting(o, t) && downstream_ready[index(o)];
    PortFlits granted{};
    for (Port o : kAllPorts) {
      if (auto winner = self.arbitrate(t, o, offered, leaves[index(o)])) {
        if (step.consumed.contains(*winner)) {
          throw Error(ErrorKind::Protocol, "input granted twice in one cycle");
        }
        step.consumed.insert(*winner);
        granted[index(o)] = offered[index(*winner)];
      }
    }
    for (Port o : kAllPorts) {
      if (leaves[index(o)]) step.outgoing[index(o)] = self.take(o);
      if (granted[index(o)]) self.load(o, *granted[index(o)], t);
    }
    return step;
  }

 private:
  Coord coord_;
  PortSet ports_;
  std::array<OutputBuffer, kPortCount> out_{};
};

}  // namespace detail

/// Flit-interleaving router: every output arbitrates flit by flit.
class RtsRouter : public detail::RouterBase {
 public:
  using CreditTable = std::array<CreditConfig, kPortCount>;

  RtsRouter(Coord coord, PortSet ports, const CreditTable& credits = {}) : RouterBase(coord, ports) {
    for (Port o : kAllPorts) {
      if (!ports.contains(o)) continue;
      std::vector<Port> inputs;
      for (Port p : kAllPorts) {
        if (p != o && ports.contains(p)) inputs.push_back(p);
      }
      arbiters_[index(o)] = init_arbiter(inputs, credits[index(o)]);
    }
  }

  const ArbiterState& arbiter(Port out) const { return arbiters_[index(out)]; }

  /// One arbitration round for `out`; returns the input whose flit it takes.
  std::optional<Port> arbitrate(Cycle t, Port out, const PortFlits& offered, bool buffer_leaves) {
    if (!may_grant(out, t, buffer_leaves)) return std::nullopt;
    const PortSet req = requests_for(out, offered);
    if (req.empty()) return std::nullopt;
    auto [granted, next] = arbiter_grant(std::move(arbiters_[index(out)]), req);
    arbiters_[index(out)] = std::move(next);
    return granted;
  }

  RouterStep cycle(Cycle t, const PortFlits& offered, const PortFlags& downstream_ready) {
    return run_cycle(*this, t, offered, downstream_ready);
  }

 private:
  std::array<ArbiterState, kPortCount> arbiters_{};
};

/// Best-effort baseline: a header claims an output and holds it until its tail is granted.
class WormholeRouter : public detail::RouterBase {
 public:
  WormholeRouter(Coord coord, PortSet ports) : RouterBase(coord, ports) { pointer_.fill(Port::NW); }

  std::optional<Port> owner(Port out) const { return owner_[index(out)]; }

  std::optional<Port> arbitrate(Cycle t, Port out, const PortFlits& offered, bool buffer_leaves) {
    if (!may_grant(out, t, buffer_leaves)) return std::nullopt;
    const PortSet req = requests_for(out, offered);
    if (req.empty()) return std::nullopt;
    auto& owner = owner_[index(out)];
    std::optional<Port> pick;
    if (owner) {
      if (req.contains(*owner)) pick = owner;
    } else {
      // plain round robin over inputs offering a header
      for (std::size_t step = 1; step <= kPortCount; ++step) {
        const Port p = static_cast<Port>((index(pointer_[index(out)]) + step) % kPortCount);
        if (req.contains(p) && is_header(offered[index(p)]->kind)) {
          pick = p;
          break;
        }
      }
    }
    if (!pick) return std::nullopt;
    pointer_[index(out)] = *pick;
    if (is_tail(offered[index(*pick)]->kind)) {
      owner.reset();
    } else {
      owner = pick;
    }
    return pick;
  }

  RouterStep cycle(Cycle t, const PortFlits& offered, const PortFlags& downstream_ready) {
    return run_cycle(*this, t, offered, downstream_ready);
  }

 private:
  std::array<std::optional<Port>, kPortCount> owner_{};
  std::array<Port, kPortCount> pointer_{};
};

}  // namespace rtsnoc
