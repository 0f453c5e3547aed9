#include "cohstate/error.hpp"

namespace cohstate {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonMonotoneSpectrum: return "NonMonotoneSpectrum";
    case ErrorKind::UnshiftedSpectrum: return "UnshiftedSpectrum";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::OutsideConvergenceDomain: return "OutsideConvergenceDomain";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::TestFunctionOutOfClass: return "TestFunctionOutOfClass";
    case ErrorKind::NoClosedForm: return "NoClosedForm";
    case ErrorKind::NoMeasure: return "NoMeasure";
    case ErrorKind::BranchOutOfRange: return "BranchOutOfRange";
    case ErrorKind::SpectrumMismatch: return "SpectrumMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::TruncationUnsafe: return "TruncationUnsafe";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace cohstate
