#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wtl {

enum class ErrorCode {
  InvalidArgument,
  // flat surfaces
  MismatchedEdge,
  Disconnected,
  DegeneratePolygon,
  NonPositiveAngle,
  UnknownEdge,
  HolonomyObstruction,
  // tables
  Overlap,
  DisconnectedComplement,
  NonRectilinear,
  SamplingExhausted,
  // billiard and surface flow
  CornerGraze,
  NoProgress,
  InsufficientData,
  TooManyExclusions,
  SingularityHit,
  NotPeriodic,
  DegeneratingCylinder,
  // induction
  NotInCatalog,
  LengthTie,
  Reducible,
  NonConvergence,
  // equations
  LabelMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MismatchedEdge: return "MismatchedEdge";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::NonPositiveAngle: return "NonPositiveAngle";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::HolonomyObstruction: return "HolonomyObstruction";
    case ErrorCode::Overlap: return "Overlap";
    case ErrorCode::DisconnectedComplement: return "DisconnectedComplement";
    case ErrorCode::NonRectilinear: return "NonRectilinear";
    case ErrorCode::SamplingExhausted: return "SamplingExhausted";
    case ErrorCode::CornerGraze: return "CornerGraze";
    case ErrorCode::NoProgress: return "NoProgress";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::TooManyExclusions: return "TooManyExclusions";
    case ErrorCode::SingularityHit: return "SingularityHit";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::DegeneratingCylinder: return "DegeneratingCylinder";
    case ErrorCode::NotInCatalog: return "NotInCatalog";
    case ErrorCode::LengthTie: return "LengthTie";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
  }
  return "Unknown";
}

}  // namespace wtl
