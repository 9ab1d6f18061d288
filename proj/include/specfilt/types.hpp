#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>

namespace specfilt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Unit round-off of IEEE double precision, 2^-52.
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon();

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Iteration caps for the dense kernels. Mutable so that harness configs can
/// raise them for stress runs; the defaults are generous for desk-scale sizes.
struct KernelLimits {
  int jacobi_sweeps_per_dim = 30;    // one-sided Jacobi: cap = 30 * rows
  int qr_shifts_per_eigenvalue = 40; // Schur/QR iteration: cap = 40 * n
};

inline KernelLimits& kernel_limits() {
  static KernelLimits limits;
  return limits;
}

}  // namespace specfilt
