#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace corelens {

enum class ErrorCode {
  invalid_argument,
  type_error,
  not_found,
  shape_error,
  conflict,
  frozen,
  io_error,
  not_nrdf,
  corrupt_file,
  unsupported_version,
  encode_error,
};

/// Stable, machine-readable spelling of an error code ("not-found", ...).
std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Parser errors carry the
/// byte offset of the read that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::uint64_t> offset = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::uint64_t> offset_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace corelens
