#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace screwdyn {

enum class ErrorKind {
  InvalidArgument,
  NotSkew,
  NotRotation,
  NotUnit,
  GimbalLock,
  PiRotation,
  CoincidentPoints,
  RankDeficient,
  SingularGram,
  EmptyDistribution,
  SingularInertia,
  SingularMass,
  DegenerateSelection,
  Incorrect,
  DegenerateCoeffs,
  DegenerateU,
  GridTooSmall,
  NonFinite,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so that
// callers (the CLI in particular) can map it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotSkew: return "NotSkew";
    case ErrorKind::NotRotation: return "NotRotation";
    case ErrorKind::NotUnit: return "NotUnit";
    case ErrorKind::GimbalLock: return "GimbalLock";
    case ErrorKind::PiRotation: return "PiRotation";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ErrorKind::SingularInertia: return "SingularInertia";
    case ErrorKind::SingularMass: return "SingularMass";
    case ErrorKind::DegenerateSelection: return "DegenerateSelection";
    case ErrorKind::Incorrect: return "Incorrect";
    case ErrorKind::DegenerateCoeffs: return "DegenerateCoeffs";
    case ErrorKind::DegenerateU: return "DegenerateU";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

}  // namespace screwdyn
