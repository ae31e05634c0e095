#pragma once

// Scenarios: what a config file describes, how it is run, and the rows it
// produces. The command-line tool is a thin wrapper over this header.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rtsnoc/analytics.hpp"
#include "rtsnoc/config.hpp"
#include "rtsnoc/network.hpp"
#include "rtsnoc/sim_engine.hpp"

namespace rtsnoc {

enum class ScenarioMode { Analytic, Simulate, Both };

/// Packet latency under best-effort sharing against a flit-interleaved channel
/// with a fixed number of contenders.
struct BestEffortModel {
  double hops = 1;
  double router_delay = 1;
  double flits = 1;
  double bandwidth = 1;
  std::uint32_t contenders = 1;
};

/// TDM best effort (with and without GS slot reuse) against the interleaving bound.
struct TdmModel {
  double hops = 1;
  double router_delay = 1;
  std::uint32_t flits = 1;
  TdmParams tdm;
  std::vector<std::uint32_t> rts_contenders;  // N_i along the interleaving path
  std::uint32_t rts_k = 1;
  std::uint32_t rts_fifo_depth = 0;
};

using AnalyticModel = std::variant<std::monostate, BestEffortModel, TdmModel>;

/// Generator for randomized flow sets, re-drawn for every seed.
struct RandomFlows {
  std::pair<std::int64_t, std::int64_t> count{3, 8};
  std::pair<std::int64_t, std::int64_t> size{1, 12};
  std::pair<std::int64_t, std::int64_t> period{5, 80};
  std::pair<std::int64_t, std::int64_t> phase{0, 30};
  double saturating_share = 0.5;
};

struct Scenario {
  std::string name;
  std::string source;
  ScenarioMode mode = ScenarioMode::Simulate;
  std::string probe;
  Cycle duration = 1000;
  std::vector<std::uint64_t> seeds{1};
  double clock_ns = 10.0;
  Cycle rx_drain_interval = 1;

  int width = 1;
  int height = 1;
  std::size_t fifo_depth = 4;
  RouterKind router = RouterKind::Rts;
  std::vector<Placement> cores;

  std::vector<FlowSpec> flows;
  std::optional<RandomFlows> random;
  std::vector<double> loads;  // offered-load sweep for the probe
  AnalyticModel analytic;

  Network network() const { return build_mesh(width, height, cores, fifo_depth, router); }
  bool simulates() const { return mode != ScenarioMode::Analytic; }
  bool analyses() const { return mode != ScenarioMode::Simulate; }
};

struct ResultRow {
  std::string scenario;
  std::string mode;
  double offered_load = 0.0;
  std::string flow;
  std::optional<double> avg_latency_cycles;
  std::optional<double> max_latency_cycles;
  std::optional<double> wcl_cycles;
  std::optional<double> throughput_flits_per_cycle;
  std::optional<double> latency_ns;
};

namespace detail {

inline std::optional<Port> port_or_fail(const ConfigFile& file, int line, std::string_view name) {
  auto p = parse_port(name);
  if (!p) file.fail(ErrorKind::Parse, line, "unknown port '" + std::string(name) + "'");
  return p;
}

inline RateLaw parse_rate(const ConfigFile& file, int line, const std::string& text) {
  const auto at = text.find('@');
  const std::string head = text.substr(0, at);
  const std::string arg = at == std::string::npos ? "" : text.substr(at + 1);
  if (head == "saturating") {
    return Saturating{arg.empty() ? 0 : parse_int(file, line, arg)};
  }
  if (head == "once") {
    if (arg.empty()) file.fail(ErrorKind::Parse, line, "once needs a cycle: once@<cycle>");
    return SingleShot{parse_int(file, line, arg)};
  }
  if (head.rfind("every:", 0) == 0) {
    const Cycle period = parse_int(file, line, head.substr(6));
    if (period < 1) file.fail(ErrorKind::Validation, line, "period must be >= 1");
    return Periodic{period, arg.empty() ? 0 : parse_int(file, line, arg)};
  }
  file.fail(ErrorKind::Parse, line, "unknown rate '" + text + "' (saturating[@t], every:<p>[@phase], once@<t>)");
}

inline const ConfigSection& require_section(const ConfigFile& file, std::string_view name) {
  const ConfigSection* s = file.section(name);
  if (!s) file.fail(ErrorKind::Validation, 1, "missing [" + std::string(name) + "] section");
  return *s;
}

/// Reads the keys of one section and rejects any it does not know.
class KeyReader {
 public:
  KeyReader(const ConfigFile& file, const ConfigSection& sec) : file_(file), sec_(sec) {}
  ~KeyReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& e : sec_.entries) {
      if (!used_.count(e.key)) {
        file_.fail(ErrorKind::Validation, e.line, "unknown key '" + e.key + "' in [" + sec_.name + "]");
      }
    }
  }

  const ConfigEntry* get(const std::string& key) {
    used_.insert(key);
    return sec_.find(key);
  }
  const ConfigEntry& need(const std::string& key) {
    const auto* e = get(key);
    if (!e) file_.fail(ErrorKind::Validation, sec_.line, "[" + sec_.name + "] needs '" + key + "'");
    return *e;
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const auto* e = get(key);
    return e ? parse_int(file_, e->line, e->value) : fallback;
  }
  double number(const std::string& key, double fallback) {
    const auto* e = get(key);
    return e ? parse_double(file_, e->line, e->value) : fallback;
  }
  double need_number(const std::string& key) {
    const auto& e = need(key);
    return parse_double(file_, e.line, e.value);
  }
  std::int64_t positive(const std::string& key, std::int64_t fallback) {
    const auto* e = get(key);
    if (!e) return fallback;
    const auto v = parse_int(file_, e->line, e->value);
    if (v < 1) file_.fail(ErrorKind::Validation, e->line, "'" + key + "' must be >= 1");
    return v;
  }

 private:
  const ConfigFile& file_;
  const ConfigSection& sec_;
  std::set<std::string> used_;
};

inline std::vector<std::uint32_t> parse_count_list(const ConfigFile& file, const ConfigEntry& e) {
  std::vector<std::uint32_t> out;
  for (const auto& item : split_list(e.value)) {
    const auto v = parse_int(file, e.line, item);
    if (v < 1) file.fail(ErrorKind::Validation, e.line, "counts must be >= 1");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  if (out.empty()) file.fail(ErrorKind::Validation, e.line, "empty list");
  return out;
}

inline void parse_analytic(const ConfigFile& file, Scenario& sc) {
  const ConfigSection* sec = file.section("analytic");
  if (!sec) return;
  KeyReader keys(file, *sec);
  const auto& model = keys.need("model");
  if (model.value == "best_effort_vs_interleave") {
    BestEffortModel m;
    m.hops = keys.need_number("hops");
    m.router_delay = keys.need_number("router_delay");
    m.flits = keys.need_number("flits");
    m.bandwidth = keys.need_number("bandwidth");
    m.contenders = static_cast<std::uint32_t>(keys.positive("contenders", 1));
    if (m.bandwidth <= 0) file.fail(ErrorKind::Validation, sec->line, "bandwidth must be positive");
    sc.analytic = m;
  } else if (model.value == "tdm_vs_interleave") {
    TdmModel m;
    m.hops = keys.need_number("hops");
    m.router_delay = keys.need_number("router_delay");
    m.flits = static_cast<std::uint32_t>(keys.positive("flits", 1));
    m.tdm.slots = static_cast<std::uint32_t>(keys.positive("slots", 1));
    m.tdm.packets = static_cast<std::uint32_t>(keys.positive("packets", 1));
    m.tdm.period = static_cast<std::uint32_t>(keys.positive("period", 4));
    m.tdm.slot_duration = keys.number("slot_duration", 1.0);
    m.tdm.gs_flows = static_cast<std::uint32_t>(keys.integer("gs_flows", 0));
    m.tdm.gs_utilization = keys.number("gs_utilization", 0.0);
    m.rts_contenders = parse_count_list(file, keys.need("rts_contenders"));
    m.rts_k = static_cast<std::uint32_t>(keys.positive("rts_k", 1));
    m.rts_fifo_depth = static_cast<std::uint32_t>(keys.integer("rts_fifo_depth", 0));
    if (m.tdm.gs_utilization < 0 || m.tdm.gs_utilization > 1) {
      file.fail(ErrorKind::Validation, sec->line, "gs_utilization must lie in [0, 1]");
    }
    if (m.tdm.slots + m.tdm.gs_flows > m.tdm.period) {
      file.fail(ErrorKind::Validation, sec->line, "slot table too small for the BE and GS slots");
    }
    sc.analytic = m;
  } else {
    file.fail(ErrorKind::Validation, model.line, "unknown analytic model '" + model.value + "'");
  }
}

inline void parse_network(const ConfigFile& file, Scenario& sc) {
  const ConfigSection& sec = require_section(file, "network");
  KeyReader keys(file, sec);
  sc.width = static_cast<int>(keys.positive("width", 1));
  sc.height = static_cast<int>(keys.positive("height", 1));
  sc.fifo_depth = static_cast<std::size_t>(keys.positive("fifo_depth", 4));
  if (const auto* e = keys.get("router")) {
    if (e->value == "rts") {
      sc.router = RouterKind::Rts;
    } else if (e->value == "wormhole") {
      sc.router = RouterKind::Wormhole;
    } else {
      file.fail(ErrorKind::Validation, e->line, "router must be rts or wormhole");
    }
  }
  const auto* placement = keys.get("placement");
  const std::string how = placement ? placement->value : "table";
  if (how == "fill") {
    // one core on every non-link port, routers in id order, ports in NN..NW order
    const Network bare = build_mesh(sc.width, sc.height, {}, sc.fifo_depth, sc.router);
    CoreId next = 0;
    for (std::size_t r = 0; r < bare.router_count(); ++r) {
      const Coord c = bare.coord_of(r);
      for (Port p : kAllPorts) {
        if (!bare.is_link(c, p)) sc.cores.push_back({next++, {c, p}});
      }
    }
    if (!sec.rows.empty()) file.fail(ErrorKind::Validation, sec.rows.front().line, "core rows given with placement = fill");
  } else if (how == "table") {
    for (const auto& row : sec.rows) {
      if (row.fields.size() != 4) file.fail(ErrorKind::Parse, row.line, "core row is: <id> <x> <y> <port>");
      Placement pl;
      pl.core = static_cast<CoreId>(parse_int(file, row.line, row.fields[0]));
      pl.address.router = {static_cast<int>(parse_int(file, row.line, row.fields[1])),
                           static_cast<int>(parse_int(file, row.line, row.fields[2]))};
      pl.address.port = *port_or_fail(file, row.line, row.fields[3]);
      sc.cores.push_back(pl);
    }
  } else {
    file.fail(ErrorKind::Validation, placement->line, "placement must be fill or table");
  }
  try {
    sc.network();
  } catch (const Error& err) {
    file.fail(ErrorKind::Validation, sec.line, err.what());
  }
}

inline void parse_flows(const ConfigFile& file, Scenario& sc) {
  const ConfigSection* sec = file.section("flows");
  if (!sec) return;
  KeyReader keys(file, *sec);
  const Network net = sc.network();
  std::set<std::string> ids;
  for (const auto& row : sec->rows) {
    if (row.fields.size() < 5 || row.fields.size() > 6) {
      file.fail(ErrorKind::Parse, row.line, "flow row is: <id> <src> <dst> <size> <rate> [data_base]");
    }
    FlowSpec f;
    f.id = row.fields[0];
    if (!ids.insert(f.id).second) file.fail(ErrorKind::Validation, row.line, "flow " + f.id + " defined twice");
    try {
      f.src = net.core_address(static_cast<CoreId>(parse_int(file, row.line, row.fields[1])));
      f.dst = net.core_address(static_cast<CoreId>(parse_int(file, row.line, row.fields[2])));
      xy_path(net, f.src, f.dst);
    } catch (const Error& err) {
      file.fail(ErrorKind::Validation, row.line, err.what());
    }
    const auto [lo, hi] = parse_int_range(file, row.line, row.fields[3]);
    if (lo < 1) file.fail(ErrorKind::Validation, row.line, "packets need at least one flit");
    if (lo == hi) {
      f.size = FixedSize{static_cast<std::uint32_t>(lo)};
    } else {
      f.size = UniformSize{static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)};
    }
    f.rate = parse_rate(file, row.line, row.fields[4]);
    if (row.fields.size() == 6) f.data_base = static_cast<std::uint64_t>(parse_int(file, row.line, row.fields[5]));
    sc.flows.push_back(std::move(f));
  }
}

inline void parse_random(const ConfigFile& file, Scenario& sc) {
  const ConfigSection* sec = file.section("random");
  if (!sec) return;
  KeyReader keys(file, *sec);
  RandomFlows r;
  const auto range = [&](const std::string& key, std::pair<std::int64_t, std::int64_t>& out, std::int64_t min) {
    if (const auto* e = keys.get(key)) {
      out = parse_int_range(file, e->line, e->value);
      if (out.first < min) file.fail(ErrorKind::Validation, e->line, "'" + key + "' starts below " + std::to_string(min));
    }
  };
  range("flows", r.count, 1);
  range("size", r.size, 1);
  range("period", r.period, 1);
  range("phase", r.phase, 0);
  r.saturating_share = keys.number("saturating_share", r.saturating_share);
  if (r.saturating_share < 0 || r.saturating_share > 1) {
    file.fail(ErrorKind::Validation, sec->line, "saturating_share must lie in [0, 1]");
  }
  sc.random = r;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in, const std::string& source) {
  const ConfigFile file = parse_config(in, source);
  static const std::set<std::string> known{"scenario", "network", "flows", "random", "sweep", "analytic"};
  for (const auto& s : file.sections) {
    if (!known.count(s.name)) file.fail(ErrorKind::Validation, s.line, "unknown section [" + s.name + "]");
  }
  Scenario sc;
  sc.source = source;
  const ConfigSection& head = detail::require_section(file, "scenario");
  {
    detail::KeyReader keys(file, head);
    sc.name = keys.need("name").value;
    if (const auto* e = keys.get("mode")) {
      if (e->value == "analytic") {
        sc.mode = ScenarioMode::Analytic;
      } else if (e->value == "simulate") {
        sc.mode = ScenarioMode::Simulate;
      } else if (e->value == "both") {
        sc.mode = ScenarioMode::Both;
      } else {
        file.fail(ErrorKind::Validation, e->line, "mode must be analytic, simulate or both");
      }
    }
    if (const auto* e = keys.get("probe")) sc.probe = e->value;
    sc.duration = keys.positive("duration", sc.duration);
    sc.rx_drain_interval = keys.positive("rx_drain_interval", 1);
    sc.clock_ns = keys.number("clock_ns", sc.clock_ns);
    if (sc.clock_ns <= 0) file.fail(ErrorKind::Validation, head.line, "clock_ns must be positive");
    if (const auto* e = keys.get("seeds")) {
      sc.seeds.clear();
      for (const auto& item : split_list(e->value)) {
        sc.seeds.push_back(static_cast<std::uint64_t>(parse_int(file, e->line, item)));
      }
      if (sc.seeds.empty()) file.fail(ErrorKind::Validation, e->line, "empty seed list");
    }
  }
  if (!head.rows.empty()) file.fail(ErrorKind::Parse, head.rows.front().line, "[scenario] takes key = value lines only");

  if (file.section("network")) {
    detail::parse_network(file, sc);
    detail::parse_flows(file, sc);
    detail::parse_random(file, sc);
  } else if (sc.simulates()) {
    file.fail(ErrorKind::Validation, head.line, "a simulated scenario needs a [network] section");
  }
  if (const auto* sweep = file.section("sweep")) {
    detail::KeyReader keys(file, *sweep);
    const auto& e = keys.need("loads");
    sc.loads = parse_number_list(file, e.line, e.value);
    for (double x : sc.loads) {
      if (x < 0 || x >= 1) file.fail(ErrorKind::Validation, e.line, "loads must lie in [0, 1)");
    }
  }
  detail::parse_analytic(file, sc);

  // cross-section checks
  if (sc.simulates() && sc.flows.empty() && !sc.random) {
    const auto* flows = file.section("flows");
    file.fail(ErrorKind::Validation, flows ? flows->line : head.line, "flow list is empty");
  }
  if (sc.flows.size() > 0 && sc.random) {
    file.fail(ErrorKind::Validation, file.section("random")->line, "give either [flows] or [random], not both");
  }
  if (!sc.probe.empty() && !sc.random &&
      std::none_of(sc.flows.begin(), sc.flows.end(), [&](const FlowSpec& f) { return f.id == sc.probe; })) {
    file.fail(ErrorKind::Validation, head.line, "probe flow '" + sc.probe + "' is not defined");
  }
  if (!sc.loads.empty() && std::holds_alternative<std::monostate>(sc.analytic) && sc.probe.empty()) {
    file.fail(ErrorKind::Validation, file.section("sweep")->line, "a load sweep needs a probe flow");
  }
  if (sc.analyses() && std::holds_alternative<std::monostate>(sc.analytic) && sc.flows.empty()) {
    file.fail(ErrorKind::Validation, head.line, "analytic mode needs an [analytic] model or a flow list");
  }
  if (!std::holds_alternative<std::monostate>(sc.analytic) && sc.loads.empty()) {
    file.fail(ErrorKind::Validation, file.section("analytic")->line, "analytic curves need [sweep] loads");
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Configuration, "cannot open " + path);
  return parse_scenario(in, path);
}

/// The flow set simulated for `seed`: the listed flows, or a fresh random draw.
inline std::vector<FlowSpec> flows_for_seed(const Scenario& sc, std::uint64_t seed) {
  if (!sc.random) return sc.flows;
  const RandomFlows& r = *sc.random;
  const Network net = sc.network();
  std::vector<CoreId> cores;
  for (const auto& [id, addr] : net.cores()) cores.push_back(id);
  if (cores.size() < 2) throw Error(ErrorKind::Configuration, "random flows need at least two cores");

  Rng rng(mix_seed(seed, 0x5eed));
  const auto draw = [&](std::pair<std::int64_t, std::int64_t> range) {
    return static_cast<std::int64_t>(rng.between(static_cast<std::uint64_t>(range.first),
                                                 static_cast<std::uint64_t>(range.second)));
  };
  // each source core carries at most one flow
  std::vector<CoreId> sources = cores;
  const auto wanted = std::min<std::size_t>(static_cast<std::size_t>(draw(r.count)), sources.size());
  std::vector<FlowSpec> flows;
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t pick = static_cast<std::size_t>(rng.between(0, sources.size() - 1));
    const CoreId src = sources[pick];
    sources.erase(sources.begin() + static_cast<std::ptrdiff_t>(pick));
    CoreId dst = src;
    while (dst == src) dst = cores[static_cast<std::size_t>(rng.between(0, cores.size() - 1))];

    FlowSpec f;
    f.id = "r" + std::to_string(i);
    f.src = net.core_address(src);
    f.dst = net.core_address(dst);
    const auto hi = static_cast<std::uint32_t>(draw(r.size));
    const auto lo = static_cast<std::uint32_t>(rng.between(static_cast<std::uint64_t>(r.size.first), hi));
    f.size = UniformSize{lo, hi};
    const bool saturating = static_cast<double>(rng.between(0, 999)) < r.saturating_share * 1000.0;
    if (saturating) {
      f.rate = Saturating{draw(r.phase)};
    } else {
      const Cycle period = draw(r.period);
      f.rate = Periodic{period, draw(r.phase)};
    }
    f.data_base = static_cast<std::uint64_t>(src) << 8;
    flows.push_back(std::move(f));
  }
  return flows;
}

inline SimConfig sim_config(const Scenario& sc, std::uint64_t seed) {
  SimConfig cfg;
  cfg.network = sc.network();
  cfg.flows = flows_for_seed(sc, seed);
  cfg.duration = sc.duration;
  cfg.seed = seed;
  cfg.clock_ns = sc.clock_ns;
  cfg.rx_drain_interval = sc.rx_drain_interval;
  return cfg;
}

/// FIFO slots that can hold foreign flits ahead of a packet. Destinations
/// that read at least one flit per grant slot never let their FIFO fill.
inline std::uint32_t blocking_depth(const Scenario& sc) {
  return sc.rx_drain_interval <= kGrantPeriod ? 0 : static_cast<std::uint32_t>(sc.fifo_depth);
}

/// Fraction of one channel's capacity a flow asks for.
inline double offered_fraction(const FlowSpec& f) {
  double mean = 1.0;
  if (const auto* fixed = std::get_if<FixedSize>(&f.size)) {
    mean = fixed->flits;
  } else {
    const auto& u = std::get<UniformSize>(f.size);
    mean = (u.min_flits + u.max_flits) / 2.0;
  }
  const double capacity = 1.0 / static_cast<double>(kGrantPeriod);
  if (std::holds_alternative<Saturating>(f.rate)) return 1.0;
  if (const auto* p = std::get_if<Periodic>(&f.rate)) {
    return std::min(1.0, mean / static_cast<double>(p->period) / capacity);
  }
  return 0.0;
}

struct RunReport {
  std::map<std::string, std::vector<ResultRow>> tables;  // per mode
  std::string summary;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline ResultRow curve_row(const Scenario& sc, double load, const std::string& curve, double latency,
                           std::optional<double> wcl = std::nullopt) {
  ResultRow row;
  row.scenario = sc.name;
  row.mode = "analytic";
  row.offered_load = load;
  row.flow = curve;
  row.avg_latency_cycles = latency;
  row.max_latency_cycles = latency;
  row.wcl_cycles = wcl;
  row.latency_ns = latency * sc.clock_ns;
  return row;
}

/// Best-effort latency, or +inf once competing traffic saturates the channel.
inline double saturating_latency(double hops, double delay, double flits, double bandwidth, double occupied) {
  try {
    return latency_wormhole_be(hops, delay, flits, bandwidth, occupied);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::Saturation) throw;
    return std::numeric_limits<double>::infinity();
  }
}

inline void analytic_curves(const Scenario& sc, std::vector<ResultRow>& rows, std::ostream& out) {
  if (const auto* m = std::get_if<BestEffortModel>(&sc.analytic)) {
    const double il = latency_interleave(m->hops, m->router_delay, m->contenders, m->flits, m->bandwidth);
    std::optional<double> crossing;
    for (double x : sc.loads) {
      const double be = saturating_latency(m->hops, m->router_delay, m->flits, m->bandwidth, x * m->bandwidth);
      rows.push_back(curve_row(sc, x, "best_effort", be));
      rows.push_back(curve_row(sc, x, "interleave", il));
      if (!crossing && be >= il) crossing = x;
    }
    const double zero = latency_topo(m->hops, m->router_delay, m->flits, m->bandwidth);
    out << "best effort at zero load: " << zero << " cycles; interleave (N=" << m->contenders << "): " << il
        << " cycles\n";
    if (crossing) out << "best effort reaches interleave at load " << *crossing << "\n";
    return;
  }
  if (const auto* m = std::get_if<TdmModel>(&sc.analytic)) {
    const auto h = static_cast<std::uint32_t>(m->rts_contenders.size());
    const double rts_max =
        static_cast<double>(packet_wcl(m->rts_contenders, m->rts_k, m->flits, m->rts_fifo_depth));
    const double rts_min = static_cast<double>(kForwardDelay * h + kGrantPeriod * (m->flits - 1));
    TdmParams off = m->tdm;
    off.slot_reuse = false;
    TdmParams on = m->tdm;
    on.slot_reuse = true;
    const double b_off = tdm_be_bandwidth(off);
    const double b_on = tdm_be_bandwidth(on);
    for (double x : sc.loads) {
      rows.push_back(curve_row(sc, x, "tdm_be", saturating_latency(m->hops, m->router_delay, m->flits, b_off, x * b_off)));
      rows.push_back(curve_row(sc, x, "tdm_be_reuse", saturating_latency(m->hops, m->router_delay, m->flits, b_on, x * b_on)));
      rows.push_back(curve_row(sc, x, "rts_min", rts_min));
      rows.push_back(curve_row(sc, x, "rts_max", rts_max, rts_max));
    }
    out << "tdm best-effort bandwidth: " << b_off << " flits/cycle own slot, " << b_on << " with GS reuse\n";
    out << "interleaving: min " << rts_min << ", max " << rts_max << " cycles at every load\n";
  }
}

}  // namespace detail

/// Runs every mode of `sc`. Rows come back unsorted; write_csv orders them.
inline RunReport run_scenario(const Scenario& sc) {
  RunReport report;
  std::ostringstream out;
  out << "scenario " << sc.name << "\n";

  if (sc.analyses()) {
    auto& rows = report.tables["analytic"];
    if (!std::holds_alternative<std::monostate>(sc.analytic)) {
      detail::analytic_curves(sc, rows, out);
    } else {
      const Network net = sc.network();
      for (const auto& f : sc.flows) {
        const auto prof = contention_profile(net, sc.flows, f.id);
        const double wcl = static_cast<double>(wcl_for_flow(net, sc.flows, f.id, blocking_depth(sc)));
        ResultRow row;
        row.scenario = sc.name;
        row.mode = "analytic";
        row.offered_load = offered_fraction(f);
        row.flow = f.id;
        row.wcl_cycles = wcl;
        row.latency_ns = wcl * sc.clock_ns;
        rows.push_back(row);
        if (sc.probe.empty() || f.id == sc.probe) {
          out << "flow " << f.id << ": wcl " << wcl << " cycles = header " << header_wcl(prof.contenders)
              << " + payload/tail " << payload_tail_wcl(prof.k, max_flits(f.size)) << " + blocking "
              << 2 * blocking_depth(sc) << "\n";
        }
      }
    }
  }

  if (sc.simulates()) {
    auto& rows = report.tables["simulate"];
    const bool tag_seed = sc.seeds.size() > 1;
    std::size_t packets = 0;
    for (std::uint64_t seed : sc.seeds) {
      const SimConfig cfg = sim_config(sc, seed);
      const std::string prefix = tag_seed ? "seed" + std::to_string(seed) + "/" : "";
      std::map<std::string, double> bound;
      if (sc.router == RouterKind::Rts) {
        for (const auto& f : cfg.flows) {
          bound[f.id] = static_cast<double>(wcl_for_flow(cfg.network, cfg.flows, f.id, blocking_depth(sc)));
        }
      }
      const auto make_row = [&](const std::string& id, double load, const FlowStats& s) {
        ResultRow row;
        row.scenario = sc.name;
        row.mode = "simulate";
        row.offered_load = load;
        row.flow = prefix + id;
        if (s.packets > 0) {
          row.avg_latency_cycles = s.avg_latency;
          row.max_latency_cycles = static_cast<double>(s.max_latency);
          row.latency_ns = static_cast<double>(s.max_latency) * sc.clock_ns;
        }
        if (bound.count(id)) row.wcl_cycles = bound.at(id);
        row.throughput_flits_per_cycle = s.throughput;
        return row;
      };

      if (!sc.loads.empty()) {
        for (const auto& sw : offered_load_sweep(cfg, sc.probe, sc.loads)) {
          if (sw.unreachable) {
            out << "load " << sw.offered_load << " not reached by the competitors, row dropped\n";
            continue;
          }
          FlowStats s;
          s.packets = sw.packets;
          s.avg_latency = sw.avg_latency;
          s.max_latency = sw.max_latency;
          s.throughput = sw.throughput;
          rows.push_back(make_row(sc.probe, sw.offered_load, s));
          if (bound.count(sc.probe) && static_cast<double>(sw.max_latency) > bound.at(sc.probe)) {
            report.violations.push_back(prefix + sc.probe + " exceeded its bound at load " +
                                        std::to_string(sw.offered_load));
          }
        }
        continue;
      }

      const Metrics m = run(cfg);
      packets += m.packets.size();
      for (const auto& v : m.violations) report.violations.push_back(prefix + v);
      for (const auto& rec : m.packets) {
        const auto& id = cfg.flows[rec.flow].id;
        if (bound.count(id) && static_cast<double>(rec.packet_latency()) > bound.at(id)) {
          report.violations.push_back(prefix + id + " packet " + std::to_string(rec.packet) + " took " +
                                      std::to_string(rec.packet_latency()) + " cycles, bound " +
                                      std::to_string(static_cast<std::int64_t>(bound.at(id))));
        }
      }
      for (std::size_t i = 0; i < cfg.flows.size(); ++i) {
        const auto& f = cfg.flows[i];
        const FlowStats& s = m.flows[i];
        rows.push_back(make_row(f.id, offered_fraction(f), s));
        const bool report_flow = sc.probe.empty() ? !tag_seed && cfg.flows.size() <= 8 : f.id == sc.probe;
        if (!report_flow) continue;
        out << prefix << "flow " << f.id << ": " << s.packets << " packets";
        if (s.packets > 0) {
          out << ", max header latency " << s.max_header_latency << ", max packet latency " << s.max_latency
              << " cycles (" << static_cast<double>(s.max_latency) * sc.clock_ns << " ns)";
        }
        if (bound.count(f.id)) {
          out << ", wcl " << bound.at(f.id) << ": "
              << (static_cast<double>(s.max_latency) <= bound.at(f.id) ? "within bound" : "BOUND EXCEEDED");
        }
        out << "\n";
      }
    }
    if (sc.loads.empty()) {
      out << packets << " packets over " << sc.seeds.size() << " seed(s), " << report.violations.size()
          << " violation(s)\n";
    }
  }
  for (const auto& v : report.violations) out << "violation: " << v << "\n";
  report.summary = out.str();
  return report;
}

/// Full check of a scenario without running it; describes the probe's contention.
inline std::string describe(const Scenario& sc) {
  std::ostringstream out;
  out << "scenario " << sc.name << ": ok\n";
  if (sc.probe.empty() || sc.flows.empty()) return out.str();
  const Network net = sc.network();
  const auto prof = contention_profile(net, sc.flows, sc.probe);
  out << "probe " << sc.probe << ": N=[";
  for (std::size_t i = 0; i < prof.contenders.size(); ++i) out << (i ? "," : "") << prof.contenders[i];
  out << "], k=" << prof.k << ", H_path=" << prof.h_path() << ", wcl="
      << wcl_for_flow(net, sc.flows, sc.probe, blocking_depth(sc)) << "\n";
  return out.str();
}

namespace detail {

inline std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  char buf[64];
  if (*v == std::floor(*v) && std::fabs(*v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", *v);
  } else {
    std::snprintf(buf, sizeof buf, "%.4f", *v);
  }
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "scenario,mode,offered_load,flow,avg_latency_cycles,max_latency_cycles,wcl_cycles,"
    "throughput_flits_per_cycle,latency_ns";

/// Rows sorted by load, then flow id; ties keep their input order.
inline std::string to_csv(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.offered_load != b.offered_load) return a.offered_load < b.offered_load;
    return a.flow < b.flow;
  });
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + r.mode + "," + detail::csv_number(r.offered_load) + "," + r.flow + "," +
           detail::csv_number(r.avg_latency_cycles) + "," + detail::csv_number(r.max_latency_cycles) + "," +
           detail::csv_number(r.wcl_cycles) + "," + detail::csv_number(r.throughput_flits_per_cycle) + "," +
           detail::csv_number(r.latency_ns) + "\n";
  }
  return out;
}

}  // namespace rtsnoc
