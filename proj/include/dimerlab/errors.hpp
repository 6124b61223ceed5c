#pragma once

#include <stdexcept>
#include <string>

namespace dimerlab {

enum class Errc {
  EmptyDomain,
  WeightUnderflow,
  NotSimplyConnected,
  UnsupportedSymmetry,
  NotExited,
  UnreachableTarget,
  PathMismatch,
  NotALoop,
  NoCompletion,
  CycleDetected,
  SingularSystem,
  UnequalColorClasses,
  ProbeSwallowed,
  CurveHitsTarget,
  NonSimpleCurve,
  MapUnavailable,
  ConfigInvalid,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyDomain: return "EmptyDomain";
    case Errc::WeightUnderflow: return "WeightUnderflow";
    case Errc::NotSimplyConnected: return "NotSimplyConnected";
    case Errc::UnsupportedSymmetry: return "UnsupportedSymmetry";
    case Errc::NotExited: return "NotExited";
    case Errc::UnreachableTarget: return "UnreachableTarget";
    case Errc::PathMismatch: return "PathMismatch";
    case Errc::NotALoop: return "NotALoop";
    case Errc::NoCompletion: return "NoCompletion";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::UnequalColorClasses: return "UnequalColorClasses";
    case Errc::ProbeSwallowed: return "ProbeSwallowed";
    case Errc::CurveHitsTarget: return "CurveHitsTarget";
    case Errc::NonSimpleCurve: return "NonSimpleCurve";
    case Errc::MapUnavailable: return "MapUnavailable";
    case Errc::ConfigInvalid: return "ConfigInvalid";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace dimerlab
