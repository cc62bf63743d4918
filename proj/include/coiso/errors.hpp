#pragma once

#include <stdexcept>
#include <string>

namespace coiso {

// Every failure the library reports carries a machine-readable kind; the CLI
// maps kinds onto exit codes and error objects.
enum class ErrorKind {
  NotSymplectic,
  OddDimension,
  IntervalMismatch,
  BadStart,
  PairingFailure,
  DegenerateForm,
  RefinementExhausted,
  DegenerateEndpoint,
  IrregularCrossing,
  FrameRankLoss,
  NotTangent,
  NotContractibleInAmbient,
  ProjectionRankLoss,
  LeftChart,
  BadParameters,
  SlopeInSpectrum,
  CInSpectrumScaled,
  NoWitnessFound,
  BadInput,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coiso
