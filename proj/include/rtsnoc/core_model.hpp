#pragma once

// Flits, packets, addresses and flows, plus the bit-level flit packing.

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rtsnoc/error.hpp"

namespace rtsnoc {

using Cycle = std::int64_t;

// Router ports are named after the cardinal points.
enum class Port : std::uint8_t { NN = 0, NE, EE, SE, SS, SW, WW, NW };

inline constexpr std::size_t kPortCount = 8;

inline constexpr std::array<Port, kPortCount> kAllPorts = {
    Port::NN, Port::NE, Port::EE, Port::SE, Port::SS, Port::SW, Port::WW, Port::NW};

constexpr std::size_t index(Port p) { return static_cast<std::size_t>(p); }

constexpr std::string_view to_string(Port p) {
  constexpr std::array<std::string_view, kPortCount> names = {"NN", "NE", "EE", "SE",
                                                               "SS", "SW", "WW", "NW"};
  return names[index(p)];
}

inline std::optional<Port> parse_port(std::string_view name) {
  for (Port p : kAllPorts) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

/// The inter-router channels NN, SS, EE and WW; the arbiter may let them send bursts.
constexpr bool is_priority_channel(Port p) {
  return p == Port::NN || p == Port::SS || p == Port::EE || p == Port::WW;
}

constexpr Port opposite(Port p) {
  switch (p) {
    case Port::NN: return Port::SS;
    case Port::SS: return Port::NN;
    case Port::EE: return Port::WW;
    case Port::WW: return Port::EE;
    case Port::NE: return Port::SW;
    case Port::SW: return Port::NE;
    case Port::SE: return Port::NW;
    case Port::NW: return Port::SE;
  }
  return p;
}

/// Small value set of ports backed by a byte mask.
class PortSet {
 public:
  constexpr PortSet() = default;
  constexpr PortSet(std::initializer_list<Port> ports) {
    for (Port p : ports) insert(p);
  }

  constexpr void insert(Port p) { mask_ |= bit(p); }
  constexpr void erase(Port p) { mask_ &= static_cast<std::uint8_t>(~bit(p)); }
  constexpr bool contains(Port p) const { return (mask_ & bit(p)) != 0; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
  constexpr std::uint8_t mask() const { return mask_; }

  std::vector<Port> to_vector() const {
    std::vector<Port> out;
    for (Port p : kAllPorts) {
      if (contains(p)) out.push_back(p);
    }
    return out;
  }

  friend constexpr bool operator==(PortSet, PortSet) = default;

 private:
  static constexpr std::uint8_t bit(Port p) { return static_cast<std::uint8_t>(1u << index(p)); }
  std::uint8_t mask_ = 0;
};

struct Coord {
  int x = 0;  // column, grows eastward
  int y = 0;  // row, grows northward
  friend constexpr bool operator==(const Coord&, const Coord&) = default;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

struct Address {
  Coord router;
  Port port = Port::NN;
  friend constexpr bool operator==(const Address&, const Address&) = default;
};

inline std::string to_string(const Address& a) {
  return "(" + std::to_string(a.router.x) + "," + std::to_string(a.router.y) + ")." +
         std::string(to_string(a.port));
}

enum class FlitKind : std::uint8_t { Payload = 0, Header = 1, Tail = 2, HeaderTail = 3 };

constexpr bool is_header(FlitKind k) { return k == FlitKind::Header || k == FlitKind::HeaderTail; }
constexpr bool is_tail(FlitKind k) { return k == FlitKind::Tail || k == FlitKind::HeaderTail; }

constexpr std::string_view to_string(FlitKind k) {
  switch (k) {
    case FlitKind::Payload: return "Payload";
    case FlitKind::Header: return "Header";
    case FlitKind::Tail: return "Tail";
    case FlitKind::HeaderTail: return "HeaderTail";
  }
  return "?";
}

using FlowIndex = std::uint32_t;
using PacketId = std::uint64_t;

struct Flit {
  FlitKind kind = FlitKind::Payload;
  Address dst;
  Address src;
  std::uint64_t data = 0;
  std::uint32_t seq = 0;
  // Simulator bookkeeping, never on the wire.
  FlowIndex flow = 0;
  PacketId packet = 0;

  friend bool operator==(const Flit&, const Flit&) = default;
};

struct Packet {
  std::vector<Flit> flits;
  std::uint32_t f = 0;
  Cycle inject_time = 0;
  PacketId id = 0;
};

struct FixedSize {
  std::uint32_t flits = 1;
};
struct UniformSize {
  std::uint32_t min_flits = 1;
  std::uint32_t max_flits = 1;
};
using SizeLaw = std::variant<FixedSize, UniformSize>;

struct Saturating {
  Cycle start = 0;
};
struct Periodic {
  Cycle period = 1;
  Cycle phase = 0;
};
struct SingleShot {
  Cycle at = 0;
};
using RateLaw = std::variant<Saturating, Periodic, SingleShot>;

struct FlowSpec {
  std::string id;
  Address src;
  Address dst;
  SizeLaw size = FixedSize{};
  RateLaw rate = Saturating{};
  // Flit data words are data_base + seq + 1, truncated to the data width.
  std::uint64_t data_base = 0;
};

inline void validate(const SizeLaw& law) {
  if (const auto* fixed = std::get_if<FixedSize>(&law)) {
    if (fixed->flits < 1) throw Error(ErrorKind::InvalidSize, "fixed packet size must be >= 1");
  } else {
    const auto& range = std::get<UniformSize>(law);
    if (range.min_flits < 1 || range.max_flits < range.min_flits) {
      throw Error(ErrorKind::InvalidSize, "uniform size range must satisfy 1 <= min <= max");
    }
  }
}

/// Breaks one request of `flow` into f flits addressed flow.src -> flow.dst.
inline Packet make_packet(const FlowSpec& flow, std::uint32_t f, Cycle inject_time,
                          unsigned data_bits = 16) {
  if (f == 0) throw Error(ErrorKind::InvalidSize, "packet of flow " + flow.id + " has zero flits");
  const std::uint64_t data_mask = data_bits >= 64 ? ~0ULL : ((1ULL << data_bits) - 1);
  Packet packet;
  packet.f = f;
  packet.inject_time = inject_time;
  packet.flits.reserve(f);
  for (std::uint32_t seq = 0; seq < f; ++seq) {
    Flit flit;
    if (f == 1) {
      flit.kind = FlitKind::HeaderTail;
    } else if (seq == 0) {
      flit.kind = FlitKind::Header;
    } else if (seq + 1 == f) {
      flit.kind = FlitKind::Tail;
    } else {
      flit.kind = FlitKind::Payload;
    }
    flit.dst = flow.dst;
    flit.src = flow.src;
    flit.seq = seq;
    flit.data = (flow.data_base + seq + 1) & data_mask;
    packet.flits.push_back(flit);
  }
  return packet;
}

constexpr unsigned bits_for(int extent) {
  unsigned bits = 0;
  while ((1LL << bits) < extent) ++bits;
  return bits;
}

/// On-wire packing, most significant first: kind | dst.x | dst.y | dst.port | data.
struct FlitLayout {
  int mesh_width = 1;
  int mesh_height = 1;
  unsigned data_bits = 16;

  static constexpr unsigned kind_bits = 2;
  static constexpr unsigned port_bits = 3;

  unsigned x_bits() const { return bits_for(mesh_width); }
  unsigned y_bits() const { return bits_for(mesh_height); }
  unsigned width() const { return kind_bits + x_bits() + y_bits() + port_bits + data_bits; }
};

inline std::uint64_t encode_flit(const Flit& flit, const FlitLayout& layout) {
  if (layout.width() > 64) throw Error(ErrorKind::Encoding, "layout wider than 64 bits");
  const auto& d = flit.dst;
  if (d.router.x < 0 || d.router.x >= layout.mesh_width || d.router.y < 0 ||
      d.router.y >= layout.mesh_height) {
    throw Error(ErrorKind::Encoding, "destination " + to_string(d) + " does not fit the layout");
  }
  if (layout.data_bits < 64 && (flit.data >> layout.data_bits) != 0) {
    throw Error(ErrorKind::Encoding, "data word exceeds " + std::to_string(layout.data_bits) + " bits");
  }
  std::uint64_t word = static_cast<std::uint64_t>(flit.kind);
  word = (word << layout.x_bits()) | static_cast<std::uint64_t>(d.router.x);
  word = (word << layout.y_bits()) | static_cast<std::uint64_t>(d.router.y);
  word = (word << FlitLayout::port_bits) | index(d.port);
  word = (layout.data_bits >= 64 ? 0 : word << layout.data_bits) | flit.data;
  return word;
}

/// Inverse of encode_flit. src, seq and the bookkeeping fields come back zeroed.
inline Flit decode_flit(std::uint64_t word, const FlitLayout& layout) {
  const unsigned width = layout.width();
  if (width > 64) throw Error(ErrorKind::Decode, "layout wider than 64 bits");
  if (width < 64 && (word >> width) != 0) {
    throw Error(ErrorKind::Decode, "word has bits set above the layout width");
  }
  auto take = [&word](unsigned bits) {
    const std::uint64_t mask = bits >= 64 ? ~0ULL : ((1ULL << bits) - 1);
    const std::uint64_t value = word & mask;
    word = bits >= 64 ? 0 : word >> bits;
    return value;
  };
  Flit flit;
  flit.data = take(layout.data_bits);
  flit.dst.port = static_cast<Port>(take(FlitLayout::port_bits));
  flit.dst.router.y = static_cast<int>(take(layout.y_bits()));
  flit.dst.router.x = static_cast<int>(take(layout.x_bits()));
  flit.kind = static_cast<FlitKind>(take(FlitLayout::kind_bits));
  if (flit.dst.router.x >= layout.mesh_width || flit.dst.router.y >= layout.mesh_height) {
    throw Error(ErrorKind::Decode, "decoded destination lies outside the mesh");
  }
  return flit;
}

// Trace words: a 4-bit tag (4 for header/tail flits, 0 for payload) on top of the data field.

inline std::uint64_t trace_word(const Flit& flit, unsigned data_bits = 16) {
  const std::uint64_t tag = (is_header(flit.kind) || is_tail(flit.kind)) ? 0x4 : 0x0;
  return (tag << data_bits) | flit.data;
}

inline std::string render_trace_word(const Flit& flit, unsigned data_bits = 16) {
  const unsigned digits = (data_bits + 4 + 3) / 4;
  std::string out(digits, '0');
  std::uint64_t word = trace_word(flit, data_bits);
  for (unsigned i = 0; i < digits; ++i) {
    out[digits - 1 - i] = "0123456789ABCDEF"[word & 0xF];
    word >>= 4;
  }
  return out;
}

/// Reads a trace word back. The tag cannot tell a header from a tail, so the flit's
/// position within its packet is required.
inline Flit decode_trace_word(std::uint64_t word, std::uint32_t seq, std::uint32_t f,
                              unsigned data_bits = 16) {
  if (f == 0 || seq >= f) throw Error(ErrorKind::Decode, "flit position outside packet");
  if ((word >> (data_bits + 4)) != 0) throw Error(ErrorKind::Decode, "trace word too wide");
  const std::uint64_t tag = word >> data_bits;
  Flit flit;
  flit.seq = seq;
  flit.data = word & ((1ULL << data_bits) - 1);
  const bool edge = (seq == 0 || seq + 1 == f);
  if (tag == 0x4 && edge) {
    flit.kind = f == 1 ? FlitKind::HeaderTail : (seq == 0 ? FlitKind::Header : FlitKind::Tail);
  } else if (tag == 0x0 && !edge) {
    flit.kind = FlitKind::Payload;
  } else {
    throw Error(ErrorKind::Decode, "trace tag does not match the flit position");
  }
  return flit;
}

}  // namespace rtsnoc
