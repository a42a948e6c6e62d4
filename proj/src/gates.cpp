#include "qtele/gates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qtele {

namespace {

constexpr Complex kI{0.0, 1.0};

Matrix permutation_swap(int dim, int a, int b) {
  Matrix m = Matrix::Identity(dim, dim);
  m.row(a).swap(m.row(b));
  return m;
}

// 1 - (alpha/x)^2 can dip below zero by rounding when |x| == alpha.
double complement(double ratio) {
  return std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
}

// U0 network as printed, leftmost (last applied) factor first.
//   IL2 = I (x) Lambda2(X)    IL1 = I (x) Lambda1(X)
//   L1I = Lambda1(X) (x) I    L2I = Lambda2(X) (x) I
//   IXI = I (x) X (x) I       IIX = I (x) I (x) X      IIZ = I (x) I (x) Z
//   U1, U2, U3 = controlled-u1 (2,3), controlled-u2 (1,3), controlled-u3 (1,2)
constexpr std::string_view kU0Network = R"(
  IL2 C13 IL1 C12 IL2 C13 IXI L1I IL2 C13
  IL2 C13 IL1 C12 IL2 C13 IIX IL1 C23 C13
  IL2 C13 IL1 C12 IL2 C13 IXI L1I
  IL2 C13 IL2 C13 IL1 C12 IL2 C13 IIX
  IL1 C13 C23 IL1 C12 IL2 C13 IL1 C12 IL2
  C13 C12 L2I C23 C12 U1 C12 L2I C23 C12 C13 IL2 C13
  IL1 C12 IL2 C13 IXI L1I IL2 C13
  IL2 C13 IL1 C12 IL2 C13 IIX IL1 C13 U2
  C13 IL2 C13 IL1 C12 IL2 C13 IXI L1I IL2
  C13 IL2 C13 IL1 C12 IL2 C13 IIX IL1 C13 U3
  IIZ IL2 C13 IL1 C12 IL2 C13 IL1 C12 C23 C13
  IL2 C13 IL1 C12 IL2 C13 IXI L1I IL2 C13
  IL2 C13 IL1 C12 IL2 C13 IIX IL1 C13 C23
  IL2 C13 IL1 C12 IL2 C13 IXI L1I IL2
  C13 IL2 C13 IL1 C12 IL2 C13 IIX IL1
)";

}  // namespace

std::optional<std::string> ChannelParams::violation() const {
  for (double v : {alpha, beta, gamma, kappa}) {
    if (!std::isfinite(v)) return "channel coefficients must be finite";
  }
  const double norm2 =
      alpha * alpha + beta * beta + gamma * gamma + kappa * kappa;
  if (std::abs(norm2 - 1.0) > kChannelNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << "channel is not normalized (sum of squares " << norm2 << ")";
    return os.str();
  }
  if (!(alpha > 0.0)) return "alpha must be strictly positive";
  if (beta == 0.0 || gamma == 0.0 || kappa == 0.0) {
    return "beta, gamma and kappa must be nonzero";
  }
  const double smallest =
      std::min({std::abs(beta), std::abs(gamma), std::abs(kappa)});
  if (alpha > smallest + kChannelNormTol) {
    return "alpha must not exceed min(|beta|, |gamma|, |kappa|)";
  }
  return std::nullopt;
}

void ChannelParams::validate() const {
  if (auto v = violation()) throw std::invalid_argument(*v);
}

ChannelParams make_channel(double alpha, double beta, double gamma,
                           double kappa) {
  ChannelParams p{alpha, beta, gamma, kappa};
  p.validate();
  return p;
}

ChannelParams random_channel(Rng& rng) {
  for (;;) {
    std::array<double, 4> v{};
    double n2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
    const double n = std::sqrt(n2);
    if (!(n > 0.0)) continue;
    for (double& x : v) x /= n;
    const auto smallest = std::min_element(
        v.begin(), v.end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); });
    std::iter_swap(v.begin(), smallest);
    ChannelParams p{std::abs(v[0]), v[1], v[2], v[3]};
    if (!p.violation()) return p;
  }
}

std::string_view kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::I: return "I";
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::Ry: return "Ry";
    case GateKind::Rz: return "Rz";
    case GateKind::Phase: return "Phase";
    case GateKind::CNOT: return "CNOT";
    case GateKind::Lambda1X: return "L1X";
    case GateKind::Lambda2X: return "L2X";
    case GateKind::C12: return "C12";
    case GateKind::C23: return "C23";
    case GateKind::C13: return "C13";
    case GateKind::CCU1_23: return "CCU1_23";
    case GateKind::CCU2_13: return "CCU2_13";
    case GateKind::CCU3_12: return "CCU3_12";
    case GateKind::Custom: return "Custom";
  }
  return "?";
}

UnitaryMatrix basic_gate(GateKind kind) {
  switch (kind) {
    case GateKind::I:
      return UnitaryMatrix::identity(2);
    case GateKind::X: {
      Matrix m(2, 2);
      m << 0, 1, 1, 0;
      return UnitaryMatrix(m);
    }
    case GateKind::Z: {
      Matrix m(2, 2);
      m << 1, 0, 0, -1;
      return UnitaryMatrix(m);
    }
    case GateKind::H: {
      Matrix m(2, 2);
      m << 1, 1, 1, -1;
      return UnitaryMatrix(m / std::numbers::sqrt2);
    }
    case GateKind::CNOT:
    case GateKind::Lambda1X:
      return UnitaryMatrix(permutation_swap(4, 2, 3));
    case GateKind::Lambda2X:
      return UnitaryMatrix(permutation_swap(4, 1, 3));
    case GateKind::C12:
      return UnitaryMatrix(permutation_swap(8, 6, 7));
    case GateKind::C23:
      return UnitaryMatrix(permutation_swap(8, 3, 7));
    case GateKind::C13:
      return UnitaryMatrix(permutation_swap(8, 5, 7));
    default:
      throw std::invalid_argument("gate kind " + std::string(kind_name(kind)) +
                                  " has no fixed matrix");
  }
}

UnitaryMatrix basic_gate(std::string_view name) {
  for (GateKind k : {GateKind::I, GateKind::X, GateKind::Z, GateKind::H,
                     GateKind::CNOT, GateKind::Lambda1X, GateKind::Lambda2X,
                     GateKind::C12, GateKind::C23, GateKind::C13}) {
    if (kind_name(k) == name) return basic_gate(k);
  }
  throw std::invalid_argument("unknown gate name: " + std::string(name));
}

UnitaryMatrix ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Matrix m(2, 2);
  m << c, -s, s, c;
  return UnitaryMatrix(m);
}

UnitaryMatrix rz(double theta) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::exp(-kI * (theta / 2));
  m(1, 1) = std::exp(kI * (theta / 2));
  return UnitaryMatrix(m);
}

UnitaryMatrix phase_gate(double delta) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = std::exp(kI * delta);
  return UnitaryMatrix(m);
}

UBlocks build_u_blocks(const ChannelParams& p) {
  p.validate();
  const double rb = p.alpha / p.beta;
  const double rg = p.alpha / p.gamma;
  const double rk = p.alpha / p.kappa;
  UBlocks b;
  b.u1 << -rb, complement(rb), -complement(rb), -rb;
  b.u2 << -rg, complement(rg), -complement(rg), -rg;
  b.u3 << rk, -complement(rk), complement(rk), rk;
  return b;
}

UnitaryMatrix build_ccu(const Matrix2& u, std::array<int, 2> controls,
                        int target) {
  const auto [i, j] = controls;
  std::array<int, 3> all{i, j, target};
  std::sort(all.begin(), all.end());
  if (all != std::array<int, 3>{1, 2, 3}) {
    throw std::invalid_argument(
        "controls and target must be a permutation of qubits 1, 2, 3");
  }
  // Basis index with both controls set; qubit q has weight 2^(3-q).
  const int base = (1 << (3 - i)) | (1 << (3 - j));
  const int lo = base;
  const int hi = base | (1 << (3 - target));
  Matrix m = Matrix::Identity(8, 8);
  m(lo, lo) = u(0, 0);
  m(lo, hi) = u(0, 1);
  m(hi, lo) = u(1, 0);
  m(hi, hi) = u(1, 1);
  return UnitaryMatrix(m);
}

UnitaryMatrix build_u0(const ChannelParams& p) {
  p.validate();
  const double rb = p.alpha / p.beta;
  const double rg = p.alpha / p.gamma;
  const double rk = p.alpha / p.kappa;
  Matrix m = Matrix::Zero(8, 8);
  m(0, 0) = 1.0;
  m(1, 1) = -rb;
  m(1, 2) = complement(rb);
  m(2, 1) = complement(rb);
  m(2, 2) = rb;
  m(3, 3) = -rg;
  m(3, 4) = complement(rg);
  m(4, 3) = complement(rg);
  m(4, 4) = rg;
  m(5, 5) = -1.0;
  m(6, 6) = rk;
  m(6, 7) = complement(rk);
  m(7, 6) = complement(rk);
  m(7, 7) = -rk;
  return UnitaryMatrix(m, kLinalgTol);
}

std::string GateOp::label() const {
  std::ostringstream os;
  os << kind_name(kind) << '(';
  for (std::size_t t = 0; t < targets.size(); ++t) {
    os << (t ? "," : "") << targets[t];
  }
  os << ')';
  return os.str();
}

GateOp make_op(GateKind kind, std::vector<int> targets) {
  GateOp op;
  op.kind = kind;
  op.matrix = basic_gate(kind);
  if (static_cast<int>(targets.size()) != op.matrix.n_qubits()) {
    throw DimensionError("gate " + std::string(kind_name(kind)) + " expects " +
                         std::to_string(op.matrix.n_qubits()) + " targets");
  }
  op.targets = std::move(targets);
  return op;
}

GateOp make_ccu_op(GateKind kind, const Matrix2& u) {
  std::array<int, 2> controls{};
  int target = 0;
  switch (kind) {
    case GateKind::CCU1_23:
      controls = {2, 3};
      target = 1;
      break;
    case GateKind::CCU2_13:
      controls = {1, 3};
      target = 2;
      break;
    case GateKind::CCU3_12:
      controls = {1, 2};
      target = 3;
      break;
    default:
      throw std::invalid_argument("not a controlled-u kind: " +
                                  std::string(kind_name(kind)));
  }
  GateOp op;
  op.kind = kind;
  op.targets = {1, 2, 3};
  op.matrix = build_ccu(u, controls, target);
  op.base = u;
  return op;
}

GateOp make_rotation_op(GateKind kind, double angle, int target) {
  GateOp op;
  op.kind = kind;
  op.targets = {target};
  switch (kind) {
    case GateKind::Ry:
      op.matrix = ry(angle);
      break;
    case GateKind::Rz:
      op.matrix = rz(angle);
      break;
    case GateKind::Phase:
      op.matrix = phase_gate(angle);
      break;
    default:
      throw std::invalid_argument("not a rotation kind: " +
                                  std::string(kind_name(kind)));
  }
  return op;
}

PureState apply_sequence(const PureState& state, const GateSequence& seq) {
  if (seq.width != state.n_qubits()) {
    throw DimensionError("sequence width does not match the state");
  }
  PureState out = state;
  for (const GateOp& op : seq.ops) out = apply_gate(out, op.matrix, op.targets);
  return out;
}

const std::vector<std::string>& u0_network_tokens() {
  static const std::vector<std::string> tokens = [] {
    std::vector<std::string> out;
    std::istringstream is{std::string(kU0Network)};
    for (std::string t; is >> t;) out.push_back(t);
    return out;
  }();
  return tokens;
}

GateSequence u0_network(const ChannelParams& p) {
  const UBlocks u = build_u_blocks(p);
  const auto& tokens = u0_network_tokens();
  GateSequence seq;
  seq.width = 3;
  seq.ops.reserve(tokens.size());
  // Rightmost printed factor acts first.
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    const std::string& t = *it;
    if (t == "IL2") seq.ops.push_back(make_op(GateKind::Lambda2X, {2, 3}));
    else if (t == "IL1") seq.ops.push_back(make_op(GateKind::Lambda1X, {2, 3}));
    else if (t == "L1I") seq.ops.push_back(make_op(GateKind::Lambda1X, {1, 2}));
    else if (t == "L2I") seq.ops.push_back(make_op(GateKind::Lambda2X, {1, 2}));
    else if (t == "IXI") seq.ops.push_back(make_op(GateKind::X, {2}));
    else if (t == "IIX") seq.ops.push_back(make_op(GateKind::X, {3}));
    else if (t == "IIZ") seq.ops.push_back(make_op(GateKind::Z, {3}));
    else if (t == "C12") seq.ops.push_back(make_op(GateKind::C12, {1, 2, 3}));
    else if (t == "C23") seq.ops.push_back(make_op(GateKind::C23, {1, 2, 3}));
    else if (t == "C13") seq.ops.push_back(make_op(GateKind::C13, {1, 2, 3}));
    else if (t == "U1") seq.ops.push_back(make_ccu_op(GateKind::CCU1_23, u.u1));
    else if (t == "U2") seq.ops.push_back(make_ccu_op(GateKind::CCU2_13, u.u2));
    else if (t == "U3") seq.ops.push_back(make_ccu_op(GateKind::CCU3_12, u.u3));
    else throw std::logic_error("bad network token " + t);
  }
  return seq;
}

Matrix embed(const Matrix& gate, std::span<const int> targets, int n_qubits) {
  const auto dim = Eigen::Index{1} << n_qubits;
  Matrix out = Matrix::Identity(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    apply_matrix(std::span<Complex>(out.col(c).data(),
                                    static_cast<std::size_t>(dim)),
                 n_qubits, gate, targets);
  }
  return out;
}

Matrix compose_matrix(const GateSequence& seq) {
  const auto dim = Eigen::Index{1} << seq.width;
  Matrix acc = Matrix::Identity(dim, dim);
  for (const GateOp& op : seq.ops) {
    for (int t : op.targets) {
      if (t < 1 || t > seq.width) {
        throw DimensionError("gate " + op.label() +
                             " does not fit register of width " +
                             std::to_string(seq.width));
      }
    }
    // Left-multiplying by the embedded gate is the same as applying the gate
    // to every column of the accumulated product.
    for (Eigen::Index c = 0; c < dim; ++c) {
      apply_matrix(std::span<Complex>(acc.col(c).data(),
                                      static_cast<std::size_t>(dim)),
                   seq.width, op.matrix.matrix(), op.targets);
    }
  }
  return acc;
}

UnitaryMatrix compose(const GateSequence& seq) {
  return UnitaryMatrix(compose_matrix(seq), kDerivedTol);
}

std::array<PureState, 4> bell_states() {
  const double s = 1.0 / std::numbers::sqrt2;
  const std::array<Complex, 4> phi_p{s, 0, 0, s}, phi_m{s, 0, 0, -s},
      psi_p{0, s, s, 0}, psi_m{0, s, -s, 0};
  return {make_state(2, phi_p), make_state(2, phi_m), make_state(2, psi_p),
          make_state(2, psi_m)};
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("matrix JSON must be a non-empty array of rows");
  }
  const auto n_rows = static_cast<Eigen::Index>(j.size());
  const auto n_cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw std::invalid_argument("ragged matrix JSON");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      const auto& z = row.at(static_cast<std::size_t>(c));
      m(r, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
    }
  }
  return m;
}

}  // namespace qtele
