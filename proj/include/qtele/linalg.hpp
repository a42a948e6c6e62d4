#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtele {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

// Tolerance for direct linear algebra (single matrix products, unitarity of
// constructed gates).
inline constexpr double kLinalgTol = 1e-12;
// Tolerance for derived quantities (long products, protocol fidelities).
inline constexpr double kDerivedTol = 1e-10;

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& message)
      : std::invalid_argument(message) {}
};

/// Square unitary matrix acting on 1, 2 or 3 qubits.
///
/// Construction validates shape, finiteness and U^dagger U = I within the
/// supplied tolerance, so every instance in circulation is a genuine unitary.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix m, double tol = kDerivedTol);

  static UnitaryMatrix identity(int dim);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int n_qubits() const;
  Complex operator()(int row, int col) const { return m_(row, col); }

  UnitaryMatrix adjoint() const;

 private:
  Matrix m_;
};

/// max_ij |(U^dagger U - I)_ij|
double unitarity_deviation(const Matrix& m);

bool is_finite(const Matrix& m);

/// max_ij |a_ij - b_ij|
double max_deviation(const Matrix& a, const Matrix& b);
double max_deviation(std::span<const Complex> a, std::span<const Complex> b);

/// Max element deviation after removing a single global phase. The phase is
/// fixed by the largest-modulus element of `a`: b is rotated so that this
/// element of b has the same argument as in a.
double deviation_up_to_phase(const Matrix& a, const Matrix& b);
double deviation_up_to_phase(std::span<const Complex> a,
                             std::span<const Complex> b);

}  // namespace qtele
