#pragma once

// XY output selection and the per-output weighted round-robin arbiter.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rtsnoc/core_model.hpp"
#include "rtsnoc/error.hpp"

namespace rtsnoc {

/// X first, then Y; local delivery once both coordinates match.
constexpr Port xy_route(Coord current, const Address& dst) {
  if (dst.router.x > current.x) return Port::EE;
  if (dst.router.x < current.x) return Port::WW;
  if (dst.router.y > current.y) return Port::NN;
  if (dst.router.y < current.y) return Port::SS;
  return dst.port;
}

// Cardinal group first, then the diagonals.
inline constexpr std::array<Port, kPortCount> kInitialPriority = {
    Port::NN, Port::SS, Port::EE, Port::WW, Port::NE, Port::SE, Port::SW, Port::NW};

using CreditConfig = std::map<Port, std::uint32_t>;

/*
 * State of one output-channel arbiter.
 *
 * priority_order lists the registered inputs from most to least preferred.
 * A priority channel that wins keeps the grant for up to `budget` consecutive
 * rounds while it keeps requesting; `credits` holds what is left of the current
 * burst. A channel that has used its burst, or any non-priority channel that
 * wins, drops to the tail of priority_order.
 */
struct ArbiterState {
  std::vector<Port> priority_order;
  std::array<std::uint32_t, kPortCount> credits{};
  std::array<std::uint32_t, kPortCount> budget{};
  std::optional<Port> last_granted;  // owner of a burst in progress
  PortSet registered;

  friend bool operator==(const ArbiterState&, const ArbiterState&) = default;
};

inline ArbiterState init_arbiter(const std::vector<Port>& registered_inputs,
                                 const CreditConfig& credit_config = {}) {
  if (registered_inputs.empty()) {
    throw Error(ErrorKind::Configuration, "arbiter needs at least one input channel");
  }
  ArbiterState state;
  for (Port p : registered_inputs) {
    if (state.registered.contains(p)) {
      throw Error(ErrorKind::Configuration,
                  "channel " + std::string(to_string(p)) + " registered twice");
    }
    state.registered.insert(p);
  }
  for (Port p : kInitialPriority) {
    if (!state.registered.contains(p)) continue;
    state.priority_order.push_back(p);
    if (is_priority_channel(p)) {
      auto it = credit_config.find(p);
      const std::uint32_t credit = it == credit_config.end() ? 1 : std::max<std::uint32_t>(1, it->second);
      state.budget[index(p)] = credit;
      state.credits[index(p)] = credit;
    }
  }
  return state;
}

namespace detail {

inline void demote(ArbiterState& s, Port p) {
  auto it = std::find(s.priority_order.begin(), s.priority_order.end(), p);
  s.priority_order.erase(it);
  s.priority_order.push_back(p);
}

}  // namespace detail

struct Grant {
  std::optional<Port> granted;
  ArbiterState state;
};

/// One arbitration round over the set of requesting input channels.
inline Grant arbiter_grant(ArbiterState state, PortSet requests) {
  for (Port p : kAllPorts) {
    if (requests.contains(p) && !state.registered.contains(p)) {
      throw Error(ErrorKind::Protocol,
                  "request from unregistered channel " + std::string(to_string(p)));
    }
  }
  if (requests.empty()) return {std::nullopt, std::move(state)};

  std::optional<Port> winner;
  if (state.last_granted) {
    const Port owner = *state.last_granted;
    if (requests.contains(owner) && state.credits[index(owner)] > 0) {
      winner = owner;
    } else {
      // The burst owner went quiet: it forfeits the rest of its burst.
      state.credits[index(owner)] = state.budget[index(owner)];
      detail::demote(state, owner);
      state.last_granted.reset();
    }
  }
  if (!winner) {
    for (Port p : state.priority_order) {
      if (requests.contains(p)) {
        winner = p;
        break;
      }
    }
  }

  const Port g = *winner;
  if (state.budget[index(g)] > 0) {
    auto& credit = state.credits[index(g)];
    --credit;
    if (credit == 0) {
      credit = state.budget[index(g)];
      detail::demote(state, g);
      state.last_granted.reset();
    } else {
      state.last_granted = g;
    }
  } else {
    detail::demote(state, g);
    state.last_granted.reset();
  }
  return {g, std::move(state)};
}

}  // namespace rtsnoc
