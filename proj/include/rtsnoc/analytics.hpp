#pragma once

// Closed-form latency models: the generic packet-latency forms, the
// flit-interleaving worst case, and the TDM best-effort model used for
// comparison. Latencies are in cycles.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rtsnoc/error.hpp"
#include "rtsnoc/network.hpp"
#include "rtsnoc/router.hpp"

namespace rtsnoc {

/// Header time plus serialization: T_h + F / b.
inline double latency_basic(double header_time, double flits, double bandwidth) {
  if (bandwidth <= 0) throw Error(ErrorKind::Domain, "bandwidth must be positive");
  return header_time + flits / bandwidth;
}

inline double latency_topo(double hops, double router_delay, double flits, double bandwidth) {
  return latency_basic(hops * router_delay, flits, bandwidth);
}

/// Best effort under competing traffic: only b - b_occupied is left for the flow.
inline double latency_wormhole_be(double hops, double router_delay, double flits, double bandwidth,
                                  double occupied) {
  if (bandwidth <= 0) throw Error(ErrorKind::Domain, "bandwidth must be positive");
  if (occupied < 0) throw Error(ErrorKind::Domain, "occupied bandwidth must be non-negative");
  if (occupied >= bandwidth) {
    throw Error(ErrorKind::Saturation, "competing traffic saturates the channel");
  }
  return hops * router_delay + flits / (bandwidth - occupied);
}

/// Interleaving: each of the N packets at a router takes its turn, whatever the load.
inline double latency_interleave(double hops, double router_delay, std::uint32_t contenders, double flits,
                                 double bandwidth) {
  if (contenders < 1) throw Error(ErrorKind::Domain, "at least one contender is required");
  if (bandwidth <= 0) throw Error(ErrorKind::Domain, "bandwidth must be positive");
  return hops * router_delay + contenders * (flits / bandwidth);
}

struct TransactionParams {
  double wait_request = 0;
  double request = 0;
  double wait_reply = 0;
  double reply = 0;
  double core = 0;
};

struct TransactionTime {
  double noc = 0;
  double total = 0;
};

inline TransactionTime transaction_time(const TransactionParams& p) {
  for (double v : {p.wait_request, p.request, p.wait_reply, p.reply, p.core}) {
    if (v < 0) throw Error(ErrorKind::Domain, "transaction terms must be non-negative");
  }
  const double noc = p.wait_request + p.request + p.wait_reply + p.reply;
  return {noc, noc + p.core};
}

// The factor 2 below is the router grant period: a contended output gives each
// contender one flit every kGrantPeriod cycles.

inline std::int64_t header_wcl(const std::vector<std::uint32_t>& contenders) {
  if (contenders.empty()) throw Error(ErrorKind::Domain, "path has no hops");
  std::int64_t total = 0;
  for (auto n : contenders) {
    if (n < 1) throw Error(ErrorKind::Domain, "every hop has at least one contender");
    total += kGrantPeriod * static_cast<std::int64_t>(n);
  }
  return total;
}

inline std::int64_t payload_tail_wcl(std::uint32_t k, std::uint32_t f) {
  if (k < 1 || f < 1) throw Error(ErrorKind::Domain, "k and f must be positive");
  return kGrantPeriod * static_cast<std::int64_t>(k) * (static_cast<std::int64_t>(f) - 1);
}

inline std::int64_t packet_wcl(const std::vector<std::uint32_t>& contenders, std::uint32_t k, std::uint32_t f,
                               std::uint32_t fifo_depth) {
  return header_wcl(contenders) + payload_tail_wcl(k, f) + 2 * static_cast<std::int64_t>(fifo_depth);
}

/// Largest packet a flow can send.
inline std::uint32_t max_flits(const SizeLaw& law) {
  if (const auto* fixed = std::get_if<FixedSize>(&law)) return fixed->flits;
  return std::get<UniformSize>(law).max_flits;
}

/// Worst-case latency of `target` in `net` given the whole flow set.
/// `blocking_depth` is the number of foreign flits that can sit ahead in the
/// end-point FIFOs; it is 0 when destinations read every flit on arrival.
inline std::int64_t wcl_for_flow(const Network& net, const std::vector<FlowSpec>& flows,
                                 const std::string& target, std::uint32_t blocking_depth = 0) {
  const ContentionProfile prof = contention_profile(net, flows, target);
  return packet_wcl(prof.contenders, prof.k, max_flits(find_flow(flows, target).size), blocking_depth);
}

struct TdmParams {
  std::uint32_t slots = 1;          // p
  std::uint32_t packets = 1;        // n
  std::uint32_t period = 4;         // P
  double slot_duration = 1;         // s
  std::uint32_t gs_flows = 0;
  double gs_utilization = 0;        // fraction of each GS slot actually used
  bool slot_reuse = false;          // BE may use idle GS slot time
};

inline double tdm_throughput(const TdmParams& p) {
  if (p.period == 0 || p.slot_duration <= 0) {
    throw Error(ErrorKind::Domain, "slot period and slot duration must be positive");
  }
  if (p.slots > p.period) throw Error(ErrorKind::Domain, "more slots assigned than the table holds");
  return (static_cast<double>(p.slots) * p.packets) / (p.period * p.slot_duration);
}

/// Bandwidth left to best-effort traffic: its own slot, plus the unused part of
/// each GS slot when reuse is on.
inline double tdm_be_bandwidth(const TdmParams& p) {
  if (p.gs_utilization < 0 || p.gs_utilization > 1) {
    throw Error(ErrorKind::Domain, "GS utilization must lie in [0, 1]");
  }
  const double own = tdm_throughput(p);
  if (!p.slot_reuse) return own;
  TdmParams gs = p;
  gs.slots = p.gs_flows;
  return own + (1.0 - p.gs_utilization) * tdm_throughput(gs);
}

inline double tdm_be_latency(double hops, double router_delay, double flits, const TdmParams& p,
                             double occupied) {
  return latency_wormhole_be(hops, router_delay, flits, tdm_be_bandwidth(p), occupied);
}

}  // namespace rtsnoc
