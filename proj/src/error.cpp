#include "corelens/error.hpp"

namespace corelens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::type_error: return "type-error";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::frozen: return "frozen";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::not_nrdf: return "not-nrdf";
    case ErrorCode::corrupt_file: return "corrupt-file";
    case ErrorCode::unsupported_version: return "unsupported-version";
    case ErrorCode::encode_error: return "encode-error";
  }
  return "unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::uint64_t> offset) {
  std::string out(to_string(code));
  out += ": ";
  out += message;
  if (offset) {
    out += " (at byte ";
    out += std::to_string(*offset);
    out += ")";
  }
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::uint64_t> offset)
    : std::runtime_error(decorate(code, message, offset)),
      code_(code),
      detail_(message),
      offset_(offset) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace corelens
