#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace confspec {

enum class ErrorKind {
  PoleAtBoundary,
  RootFindingFailure,
  NodeSingularity,
  DeltaOutOfRange,
  ParameterOutOfRange,
  AlphaNotRegular,
  AlphaNotRegularForMap,
  KNormDivergent,
  InfeasibleParameters,
  SupNormUnbounded,
  MeshQualityFailure,
  SolverFailure,
  InvalidMapSpec,
  InvalidConfig,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PoleAtBoundary: return "PoleAtBoundary";
    case ErrorKind::RootFindingFailure: return "RootFindingFailure";
    case ErrorKind::NodeSingularity: return "NodeSingularity";
    case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::AlphaNotRegular: return "AlphaNotRegular";
    case ErrorKind::AlphaNotRegularForMap: return "AlphaNotRegularForMap";
    case ErrorKind::KNormDivergent: return "KNormDivergent";
    case ErrorKind::InfeasibleParameters: return "InfeasibleParameters";
    case ErrorKind::SupNormUnbounded: return "SupNormUnbounded";
    case ErrorKind::MeshQualityFailure: return "MeshQualityFailure";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::InvalidMapSpec: return "InvalidMapSpec";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace confspec
