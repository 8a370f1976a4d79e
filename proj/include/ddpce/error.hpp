#pragma once

#include <stdexcept>
#include <string>

namespace ddpce {

enum class ErrorKind {
  Config,
  Parse,
  Io,
  RankDeficient,
  IllConditioned,
  Underdetermined,
  NumericRange,
  BasisTooLarge,
  UndefinedDeviation,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::IllConditioned: return "ill_conditioned";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::NumericRange: return "numeric_range";
    case ErrorKind::BasisTooLarge: return "basis_too_large";
    case ErrorKind::UndefinedDeviation: return "undefined_deviation";
  }
  return "unknown";
}

/// Every library failure is reported through this type; `kind()` is the
/// machine-readable category printed by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ddpce
