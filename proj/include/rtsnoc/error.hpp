#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtsnoc {

enum class ErrorKind {
  InvalidSize,
  Encoding,
  Decode,
  Configuration,
  Protocol,
  Topology,
  Placement,
  Bounds,
  Lookup,
  Domain,
  Saturation,
  Parse,
  Validation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize: return "invalid-size";
    case ErrorKind::Encoding: return "encoding";
    case ErrorKind::Decode: return "decode";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Placement: return "placement";
    case ErrorKind::Bounds: return "bounds";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Saturation: return "saturation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rtsnoc
