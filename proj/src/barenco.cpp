#include "qtele/barenco.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qtele {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

Matrix2 ry2(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Matrix2 m;
  m << c, -s, s, c;
  return m;
}

Matrix2 rz2(double theta) {
  Matrix2 m = Matrix2::Zero();
  m(0, 0) = std::exp(-kI * (theta / 2));
  m(1, 1) = std::exp(kI * (theta / 2));
  return m;
}

void require_unitary(const Matrix2& u) {
  if (!is_finite(u) || !(unitarity_deviation(u) < kDerivedTol)) {
    throw std::invalid_argument("expected a 2x2 unitary");
  }
}

void append(std::vector<PrimitiveGate>& out,
            const std::vector<PrimitiveGate>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

PrimitiveGate PrimitiveGate::single(int qubit, const Matrix2& m) {
  PrimitiveGate g;
  g.kind = Kind::Single;
  g.qubits = {qubit, 0};
  g.matrix = m;
  return g;
}

PrimitiveGate PrimitiveGate::cnot(int control, int target) {
  PrimitiveGate g;
  g.kind = Kind::Cnot;
  g.qubits = {control, target};
  return g;
}

Matrix2 ZyzAngles::reconstruct() const {
  return std::exp(kI * delta) * rz2(beta) * ry2(theta) * rz2(gamma);
}

ZyzAngles zy_decompose(const Matrix2& u) {
  require_unitary(u);
  ZyzAngles z;
  z.delta = std::arg(u.determinant()) / 2;
  const Matrix2 v = u * std::exp(-kI * z.delta);  // det v = 1

  // v = [[e^{-i(b+g)/2} c, -e^{-i(b-g)/2} s], [e^{i(b-g)/2} s, e^{i(b+g)/2} c]]
  // Read the half-angle phases off directly; differencing two args and halving
  // would lose a sign whenever the difference wraps.
  const double c = std::abs(v(1, 1));
  const double s = std::abs(v(1, 0));
  z.theta = 2 * std::atan2(s, c);
  const double half_sum = c > 1e-14 ? std::arg(v(1, 1)) : 0.0;
  const double half_diff = s > 1e-14 ? std::arg(v(1, 0)) : 0.0;
  z.beta = half_sum + half_diff;
  z.gamma = half_sum - half_diff;

  if (!(max_deviation(z.reconstruct(), u) < kDerivedTol)) {
    throw std::runtime_error("ZYZ reconstruction failed");
  }
  return z;
}

Matrix2 principal_sqrt(const Matrix2& u) {
  require_unitary(u);
  // The Schur form of a normal matrix is diagonal, and its Schur vectors are
  // orthonormal even when the eigenvalues coincide.
  Eigen::ComplexSchur<Matrix2> schur(u);
  const Matrix2& t = schur.matrixT();
  const Matrix2& q = schur.matrixU();
  Matrix2 root = Matrix2::Zero();
  for (int i = 0; i < 2; ++i) {
    double phase = std::arg(t(i, i));
    if (phase <= -kPi + 1e-15) phase = kPi;
    root(i, i) = std::exp(kI * (phase / 2));
  }
  return q * root * q.adjoint();
}

AbcFactors abc_factors(const Matrix2& u) {
  const ZyzAngles z = zy_decompose(u);
  AbcFactors f;
  f.a = rz2(z.beta) * ry2(z.theta / 2);
  f.b = ry2(-z.theta / 2) * rz2(-(z.gamma + z.beta) / 2);
  f.c = rz2((z.gamma - z.beta) / 2);
  f.delta = z.delta;
  return f;
}

std::vector<PrimitiveGate> decompose_cu(const Matrix2& u, int control,
                                        int target) {
  if (control == target) {
    throw std::invalid_argument("control and target must differ");
  }
  const AbcFactors f = abc_factors(u);
  Matrix2 phase = Matrix2::Identity();
  phase(1, 1) = std::exp(kI * f.delta);
  return {
      PrimitiveGate::single(target, f.c),
      PrimitiveGate::cnot(control, target),
      PrimitiveGate::single(target, f.b),
      PrimitiveGate::cnot(control, target),
      PrimitiveGate::single(target, f.a),
      PrimitiveGate::single(control, phase),
  };
}

std::vector<PrimitiveGate> decompose_ccu(const Matrix2& u,
                                         std::array<int, 2> controls,
                                         int target) {
  const auto [i, j] = controls;
  if (i == j || i == target || j == target) {
    throw std::invalid_argument("controls and target must be distinct");
  }
  const Matrix2 v = principal_sqrt(u);
  std::vector<PrimitiveGate> out;
  append(out, decompose_cu(v, j, target));
  out.push_back(PrimitiveGate::cnot(i, j));
  append(out, decompose_cu(v.adjoint(), j, target));
  out.push_back(PrimitiveGate::cnot(i, j));
  append(out, decompose_cu(v, i, target));
  return out;
}

std::vector<PrimitiveGate> flatten(const GateSequence& seq) {
  std::vector<PrimitiveGate> out;
  const auto x = basic_gate(GateKind::X).matrix();
  for (const GateOp& op : seq.ops) {
    const auto& t = op.targets;
    switch (op.kind) {
      case GateKind::I:
      case GateKind::X:
      case GateKind::Z:
      case GateKind::H:
      case GateKind::Ry:
      case GateKind::Rz:
      case GateKind::Phase:
        out.push_back(PrimitiveGate::single(t.at(0), op.matrix.matrix()));
        break;
      case GateKind::CNOT:
      case GateKind::Lambda1X:
        out.push_back(PrimitiveGate::cnot(t.at(0), t.at(1)));
        break;
      case GateKind::Lambda2X:
        out.push_back(PrimitiveGate::cnot(t.at(1), t.at(0)));
        break;
      // Doubly-controlled kinds are defined on a 3-qubit block; map the
      // block's local qubit numbers through the op's targets.
      case GateKind::C12:
        append(out, decompose_ccu(x, {t.at(0), t.at(1)}, t.at(2)));
        break;
      case GateKind::C23:
        append(out, decompose_ccu(x, {t.at(1), t.at(2)}, t.at(0)));
        break;
      case GateKind::C13:
        append(out, decompose_ccu(x, {t.at(0), t.at(2)}, t.at(1)));
        break;
      case GateKind::CCU1_23:
        append(out, decompose_ccu(op.base.value(), {t.at(1), t.at(2)}, t.at(0)));
        break;
      case GateKind::CCU2_13:
        append(out, decompose_ccu(op.base.value(), {t.at(0), t.at(2)}, t.at(1)));
        break;
      case GateKind::CCU3_12:
        append(out, decompose_ccu(op.base.value(), {t.at(0), t.at(1)}, t.at(2)));
        break;
      case GateKind::Custom:
        throw FlattenError("cannot flatten custom gate " + op.label());
    }
  }
  return out;
}

Matrix compose_primitives(const std::vector<PrimitiveGate>& gates,
                          int n_qubits) {
  const auto dim = Eigen::Index{1} << n_qubits;
  Matrix acc = Matrix::Identity(dim, dim);
  const Matrix cnot = basic_gate(GateKind::CNOT).matrix();
  for (const PrimitiveGate& g : gates) {
    const Matrix m = g.kind == PrimitiveGate::Kind::Cnot ? cnot : Matrix(g.matrix);
    const std::span<const int> targets(
        g.qubits.data(), g.kind == PrimitiveGate::Kind::Cnot ? 2 : 1);
    for (Eigen::Index c = 0; c < dim; ++c) {
      apply_matrix(std::span<Complex>(acc.col(c).data(),
                                      static_cast<std::size_t>(dim)),
                   n_qubits, m, targets);
    }
  }
  return acc;
}

GateCounts count_gates(const std::vector<PrimitiveGate>& gates) {
  GateCounts c;
  for (const auto& g : gates) {
    if (g.kind == PrimitiveGate::Kind::Cnot) ++c.cnot;
    else ++c.single;
  }
  return c;
}

void write_primitives(std::ostream& os,
                      const std::vector<PrimitiveGate>& gates) {
  std::ostringstream line;
  line.precision(17);
  for (const auto& g : gates) {
    line.str("");
    if (g.kind == PrimitiveGate::Kind::Cnot) {
      line << "CNOT " << g.qubits[0] << ' ' << g.qubits[1];
    } else {
      line << "U " << g.qubits[0];
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          line << ' ' << g.matrix(r, c).real() << ' ' << g.matrix(r, c).imag();
        }
      }
    }
    os << line.str() << '\n';
  }
}

std::vector<PrimitiveGate> read_primitives(std::istream& is) {
  std::vector<PrimitiveGate> out;
  std::string text;
  int line_no = 0;
  while (std::getline(is, text)) {
    ++line_no;
    std::istringstream ls(text);
    std::string name;
    if (!(ls >> name) || name.front() == '#') continue;
    const auto fail = [&] {
      return std::invalid_argument("malformed gate on line " +
                                   std::to_string(line_no) + ": " + text);
    };
    if (name == "CNOT") {
      int c = 0, t = 0;
      if (!(ls >> c >> t) || c == t) throw fail();
      out.push_back(PrimitiveGate::cnot(c, t));
    } else if (name == "U") {
      int q = 0;
      std::array<double, 8> v{};
      if (!(ls >> q)) throw fail();
      for (double& x : v) {
        if (!(ls >> x)) throw fail();
      }
      Matrix2 m;
      m << Complex(v[0], v[1]), Complex(v[2], v[3]), Complex(v[4], v[5]),
          Complex(v[6], v[7]);
      out.push_back(PrimitiveGate::single(q, m));
    } else {
      throw fail();
    }
    std::string extra;
    if (ls >> extra) throw fail();
  }
  return out;
}

}  // namespace qtele
