#include "qtele/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qtele {

UnitaryMatrix::UnitaryMatrix(Matrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionError("unitary matrix must be square");
  }
  const auto d = m_.rows();
  if (d != 2 && d != 4 && d != 8) {
    throw DimensionError("unitary dimension must be 2, 4 or 8, got " +
                         std::to_string(d));
  }
  if (!is_finite(m_)) {
    throw std::invalid_argument("unitary matrix has non-finite entries");
  }
  const double dev = unitarity_deviation(m_);
  if (!(dev < tol)) {
    throw std::invalid_argument("matrix is not unitary (deviation " +
                                std::to_string(dev) + ")");
  }
}

UnitaryMatrix UnitaryMatrix::identity(int dim) {
  return UnitaryMatrix(Matrix::Identity(dim, dim));
}

int UnitaryMatrix::n_qubits() const {
  switch (dim()) {
    case 2:
      return 1;
    case 4:
      return 2;
    default:
      return 3;
  }
}

UnitaryMatrix UnitaryMatrix::adjoint() const {
  return UnitaryMatrix(m_.adjoint());
}

double unitarity_deviation(const Matrix& m) {
  const Matrix prod = m.adjoint() * m;
  return (prod - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

bool is_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double max_deviation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix shapes differ");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

double max_deviation(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("vector lengths differ");
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dev = std::max(dev, std::abs(a[i] - b[i]));
  }
  return dev;
}

double deviation_up_to_phase(std::span<const Complex> a,
                             std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("vector lengths differ");
  if (a.empty()) return 0.0;
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (std::abs(a[i]) > std::abs(a[pivot])) pivot = i;
  }
  Complex phase{1.0, 0.0};
  if (std::abs(b[pivot]) > 0.0 && std::abs(a[pivot]) > 0.0) {
    const Complex r = a[pivot] / b[pivot];
    phase = r / std::abs(r);
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dev = std::max(dev, std::abs(a[i] - phase * b[i]));
  }
  return dev;
}

double deviation_up_to_phase(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix shapes differ");
  }
  // Both matrices are column-major with equal shape, so element-wise views
  // line up.
  return deviation_up_to_phase(
      std::span<const Complex>(a.data(), static_cast<std::size_t>(a.size())),
      std::span<const Complex>(b.data(), static_cast<std::size_t>(b.size())));
}

}  // namespace qtele
