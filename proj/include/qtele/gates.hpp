#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtele/linalg.hpp"
#include "qtele/statevector.hpp"

namespace qtele {

inline constexpr double kChannelNormTol = 1e-12;

/// Real coefficients of the four-particle channel
///   alpha|0000> + beta|1001> + gamma|0110> + kappa|1111>   (qubits 3,4,5,6).
///
/// Valid channels are normalized, have every coefficient nonzero, and satisfy
/// 0 < alpha <= min(|beta|, |gamma|, |kappa|).
struct ChannelParams {
  double alpha = 0.5;
  double beta = 0.5;
  double gamma = 0.5;
  double kappa = 0.5;

  /// Returns an error description, or nullopt when the parameters are valid.
  std::optional<std::string> violation() const;
  /// Throws std::invalid_argument with the violation text.
  void validate() const;
};

ChannelParams make_channel(double alpha, double beta, double gamma,
                           double kappa);

/// Channel with alpha drawn as the smallest-modulus component of a random
/// unit 4-vector; the remaining components keep their random signs.
ChannelParams random_channel(Rng& rng);

enum class GateKind {
  I,
  X,
  Z,
  H,
  Ry,
  Rz,
  Phase,
  CNOT,
  Lambda1X,  // 4x4, control on the first qubit, target on the second
  Lambda2X,  // 4x4, control on the second qubit, target on the first
  C12,
  C23,
  C13,
  CCU1_23,  // controlled-u1 with controls (2,3)
  CCU2_13,  // controlled-u2 with controls (1,3)
  CCU3_12,  // controlled-u3 with controls (1,2)
  Custom,
};

std::string_view kind_name(GateKind kind);

/// Fixed matrix for I, X, Z, H, CNOT, Lambda1X, Lambda2X, C12, C23, C13.
/// Throws for parameterized or custom kinds.
UnitaryMatrix basic_gate(GateKind kind);
/// Same, by name: "I", "X", "Z", "H", "CNOT", "L1X", "L2X", "C12", "C23",
/// "C13".
UnitaryMatrix basic_gate(std::string_view name);

UnitaryMatrix ry(double theta);
UnitaryMatrix rz(double theta);
/// diag(1, e^{i delta})
UnitaryMatrix phase_gate(double delta);

struct UBlocks {
  Matrix2 u1;
  Matrix2 u2;
  Matrix2 u3;
};

/// The 2x2 blocks of the three doubly-controlled gates in the U0 network.
UBlocks build_u_blocks(const ChannelParams& p);

/// 8x8 gate applying `u` to qubit `target` when both `controls` are 1.
/// Qubits are numbered 1..3 with qubit 1 most significant.
UnitaryMatrix build_ccu(const Matrix2& u, std::array<int, 2> controls,
                        int target);

/// Bob's collective purification unitary over |q5 q6 qa>.
UnitaryMatrix build_u0(const ChannelParams& p);

/// A unitary bound to ordered register qubits.
struct GateOp {
  GateKind kind = GateKind::Custom;
  std::vector<int> targets;
  UnitaryMatrix matrix = UnitaryMatrix::identity(2);
  // Target-qubit operator for the doubly-controlled kinds.
  std::optional<Matrix2> base;

  std::string label() const;
};

GateOp make_op(GateKind kind, std::vector<int> targets);
GateOp make_ccu_op(GateKind kind, const Matrix2& u);
/// Ry, Rz or Phase with angle `angle` on `target`.
GateOp make_rotation_op(GateKind kind, double angle, int target);

/// Gates in temporal order: ops.front() acts first.
struct GateSequence {
  int width = 3;
  std::vector<GateOp> ops;
};

/// Applies every op of `seq` to `state` in temporal order.
PureState apply_sequence(const PureState& state, const GateSequence& seq);

/// The 148-factor network for U0 in temporal order.
GateSequence u0_network(const ChannelParams& p);

/// Tokens of the U0 network in printed (matrix-product) order, leftmost
/// factor first.
const std::vector<std::string>& u0_network_tokens();

/// 2^n x 2^n matrix of `gate` acting on `targets` inside an n-qubit register.
Matrix embed(const Matrix& gate, std::span<const int> targets, int n_qubits);

/// Ordered product of the embedded factors (last op leftmost).
Matrix compose_matrix(const GateSequence& seq);
UnitaryMatrix compose(const GateSequence& seq);

/// Phi+, Phi-, Psi+, Psi- in that order.
std::array<PureState, 4> bell_states();

/// Row-major matrix of [re, im] pairs.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace qtele
