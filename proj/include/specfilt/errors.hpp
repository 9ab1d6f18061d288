#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace specfilt {

/// Base class for failures raised by the numerical kernels.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A column norm collapsed to zero during QR elimination.
struct DegeneratePivotError : NumericalError {
  int column;
  explicit DegeneratePivotError(int col)
      : NumericalError("qr: degenerate pivot in column " + std::to_string(col)),
        column(col) {}
};

/// zI - A was exactly singular to working precision for the given shift.
struct SingularShiftError : NumericalError {
  std::complex<double> shift;
  explicit SingularShiftError(std::complex<double> z)
      : NumericalError("shifted solve: singular shift z = (" +
                       std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"),
        shift(z) {}
};

/// A filter was evaluated at (or within round-off of) one of its poles.
struct PoleHitError : NumericalError {
  std::complex<double> node;
  std::complex<double> point;
  PoleHitError(std::complex<double> z, std::complex<double> lambda)
      : NumericalError("filter evaluation hit the pole at (" +
                       std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"),
        node(z),
        point(lambda) {}
};

/// Iterative kernel failed to converge within its cap.
struct ConvergenceFailure : NumericalError {
  int iterations;
  ConvergenceFailure(const std::string& what, int iters)
      : NumericalError(what + " (after " + std::to_string(iters) + " iterations)"),
        iterations(iters) {}
};

/// The filter does not separate target from unwanted eigenvalues (rho >= 1).
struct SeparationFailure : NumericalError {
  double rho;
  explicit SeparationFailure(double r)
      : NumericalError("filter fails to separate the spectrum: rho = " + std::to_string(r)),
        rho(r) {}
};

/// Evaluation outside the admissible domain of the dynamics map.
struct PhiDomainError : NumericalError {
  double bound;
  explicit PhiDomainError(double eta, double domain_bound)
      : NumericalError("phi: eta = " + std::to_string(eta) +
                       " outside domain [0, " + std::to_string(domain_bound) + ")"),
        bound(domain_bound) {}
};

/// Invalid experiment configuration (bad override, unknown name, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace specfilt
