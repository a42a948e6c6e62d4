#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtele/gates.hpp"

namespace qtele {

class FlattenError : public std::invalid_argument {
 public:
  explicit FlattenError(const std::string& message)
      : std::invalid_argument(message) {}
};

/// A single-qubit unitary or a CNOT. Flattened circuits contain nothing else.
struct PrimitiveGate {
  enum class Kind { Single, Cnot };

  Kind kind = Kind::Single;
  // Single: {qubit, 0}. Cnot: {control, target}.
  std::array<int, 2> qubits{};
  // Only meaningful for Single.
  Matrix2 matrix = Matrix2::Identity();

  static PrimitiveGate single(int qubit, const Matrix2& m);
  static PrimitiveGate cnot(int control, int target);
};

/// u = e^{i delta} Rz(beta) Ry(theta) Rz(gamma)
struct ZyzAngles {
  double delta = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  double gamma = 0.0;

  Matrix2 reconstruct() const;
};

ZyzAngles zy_decompose(const Matrix2& u);

/// Principal square root: eigenphases halved into (-pi/2, pi/2].
Matrix2 principal_sqrt(const Matrix2& u);

/// A, B, C with A B C = I and A X B X C = e^{-i delta} u.
struct AbcFactors {
  Matrix2 a;
  Matrix2 b;
  Matrix2 c;
  double delta = 0.0;
};

AbcFactors abc_factors(const Matrix2& u);

/// Controlled-u as C(target), CNOT, B(target), CNOT, A(target), then
/// diag(1, e^{i delta}) on the control. Exact, including relative phase.
std::vector<PrimitiveGate> decompose_cu(const Matrix2& u, int control,
                                        int target);

/// Doubly-controlled u from two-level controlled-V gates, V^2 = u:
///   C-V(j,k), CNOT(i,j), C-V^dagger(j,k), CNOT(i,j), C-V(i,k)
/// with each controlled-V flattened by decompose_cu.
std::vector<PrimitiveGate> decompose_ccu(const Matrix2& u,
                                         std::array<int, 2> controls,
                                         int target);

/// Rewrites every op of `seq` into primitives. Throws FlattenError for Custom
/// ops.
std::vector<PrimitiveGate> flatten(const GateSequence& seq);

/// Product of the primitives on an n-qubit register (last gate leftmost).
Matrix compose_primitives(const std::vector<PrimitiveGate>& gates,
                          int n_qubits);

struct GateCounts {
  std::size_t single = 0;
  std::size_t cnot = 0;
  std::size_t total() const { return single + cnot; }
};

GateCounts count_gates(const std::vector<PrimitiveGate>& gates);

/// Line format, one gate per line:
///   U <q> <re00> <im00> <re01> <im01> <re10> <im10> <re11> <im11>
///   CNOT <control> <target>
/// Lines starting with '#' and blank lines are ignored when reading.
void write_primitives(std::ostream& os, const std::vector<PrimitiveGate>& gates);
std::vector<PrimitiveGate> read_primitives(std::istream& is);

}  // namespace qtele
