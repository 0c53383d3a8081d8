#pragma once

#include <stdexcept>
#include <string>

namespace hjbopt {

// Library errors carry a machine-parseable kind so the CLI can map each
// failure class to a distinct exit code.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

namespace errkind {
inline constexpr const char* config = "config-invalid";
inline constexpr const char* mismatch = "input-mismatch";
inline constexpr const char* io = "io-failure";
inline constexpr const char* solver = "solver-diverged";
inline constexpr const char* analysis = "analysis-precondition";
inline constexpr const char* domain = "outside-box";
inline constexpr const char* calibration = "calibration-failed";
}  // namespace errkind

[[noreturn]] inline void fail(const char* kind, const std::string& msg) {
    throw Error(kind, msg);
}

inline void require(bool ok, const char* kind, const std::string& msg) {
    if (!ok) fail(kind, msg);
}

}  // namespace hjbopt
