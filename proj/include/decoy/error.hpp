#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace decoy {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorKind {
  InvalidArgument,  ///< precondition violated (range, size, ordering)
  Configuration,    ///< a valid value that the requested method cannot use
  Degenerate,       ///< coinciding intensities in a Vandermonde inversion
  Parse,            ///< malformed serialized record
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

using WarningHandler = std::function<void(std::string_view)>;

// Non-fatal diagnostics (close intensities, fiber model used outside [0, 1]).
// The default handler writes to stderr. Passing an empty handler restores it.
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace decoy
