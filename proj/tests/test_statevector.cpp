#include <doctest.h>

#include <cmath>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qtele/gates.hpp"
#include "qtele/statevector.hpp"

using namespace qtele;

namespace {

Eigen::VectorXcd as_vector(const PureState& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

PureState random_state(int n, Rng& rng) {
  std::vector<Complex> v(std::size_t{1} << n);
  for (auto& z : v) z = Complex(rng.normal(), rng.normal());
  return PureState(n, v);
}

}  // namespace

TEST_SUITE("statevector") {

TEST_CASE("make_state") {
  const PureState zero = make_state(1);
  CHECK(zero[0] == Complex(1.0));
  CHECK(zero[1] == Complex(0.0));

  const std::vector<Complex> raw{1.0, 1.0, 0.0, 0.0};
  const PureState s = make_state(2, raw);
  CHECK(std::abs(s[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(s.norm() - 1.0) < 1e-15);

  CHECK_THROWS(make_state(2, std::vector<Complex>(3)));
  CHECK_THROWS(make_state(1, std::vector<Complex>{0.0, 0.0}));
  CHECK_THROWS(make_state(1, std::vector<Complex>{NAN, 1.0}));
}

TEST_CASE("six-qubit product of input and equal channel") {
  std::vector<Complex> in{1.0, 0.0, 0.0, 0.0};
  std::vector<Complex> ch(16);
  ch[0b0000] = ch[0b1001] = ch[0b0110] = ch[0b1111] = 0.5;
  const PureState s = tensor(make_state(2, in), make_state(4, ch));
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const bool expected = i == 0b000000 || i == 0b001001 || i == 0b000110 ||
                          i == 0b001111;
    CHECK(std::abs(s[i] - (expected ? 0.5 : 0.0)) < 1e-15);
  }
}

TEST_CASE("apply_gate on basis states") {
  const PureState one = apply_gate(make_state(1), basic_gate(GateKind::X), {1});
  CHECK(std::abs(one[1] - 1.0) < 1e-15);

  // |10> -> |11>
  const std::vector<Complex> ten{0, 0, 1, 0};
  const PureState s = apply_gate(make_state(2, ten), basic_gate("L1X"), {1, 2});
  CHECK(std::abs(s[3] - 1.0) < 1e-15);

  // |110> -> |111>
  std::vector<Complex> v(8);
  v[6] = 1.0;
  const PureState t = apply_gate(make_state(3, v), basic_gate("C12"), {1, 2, 3});
  CHECK(std::abs(t[7] - 1.0) < 1e-15);

  CHECK_THROWS_AS(apply_gate(make_state(2), basic_gate("X"), {3}), std::out_of_range);
  CHECK_THROWS_AS(apply_gate(make_state(2), basic_gate("CNOT"), {1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_gate(make_state(2), basic_gate("CNOT"), {1}),
                  DimensionError);
}

TEST_CASE("apply_gate agrees with explicit Kronecker embedding") {
  Rng rng(7);
  const Matrix h = basic_gate(GateKind::H).matrix();
  const Matrix cnot = basic_gate(GateKind::CNOT).matrix();
  const Matrix i2 = Matrix::Identity(2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const PureState s = random_state(3, rng);
    // H on qubit 2 of 3.
    const Matrix full_h = Eigen::kroneckerProduct(
        Matrix(Eigen::kroneckerProduct(i2, h)), i2);
    const Eigen::VectorXcd want_h = full_h * as_vector(s);
    const PureState got_h = apply_gate(s, basic_gate(GateKind::H), {2});
    CHECK((as_vector(got_h) - want_h).cwiseAbs().maxCoeff() < 1e-14);
    // CNOT on qubits (2,3).
    const Matrix full_c = Eigen::kroneckerProduct(i2, cnot);
    const Eigen::VectorXcd want_c = full_c * as_vector(s);
    const PureState got_c = apply_gate(s, basic_gate(GateKind::CNOT), {2, 3});
    CHECK((as_vector(got_c) - want_c).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("reversed targets equal a swapped gate") {
  Rng rng(11);
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  const Matrix cnot = basic_gate(GateKind::CNOT).matrix();
  const UnitaryMatrix flipped(swap * cnot * swap);
  for (int trial = 0; trial < 5; ++trial) {
    const PureState s = random_state(4, rng);
    const PureState a = apply_gate(s, basic_gate(GateKind::CNOT), {4, 2});
    const PureState b = apply_gate(s, flipped, {2, 4});
    CHECK(max_deviation(a.amplitudes(), b.amplitudes()) < 1e-14);
  }
}

TEST_CASE("norm preserved over long random circuits") {
  Rng rng(3);
  PureState s = random_state(5, rng);
  for (int step = 0; step < 500; ++step) {
    const int q = 1 + static_cast<int>(rng.next_u64() % 5);
    const int r = 1 + static_cast<int>((q + rng.next_u64() % 4) % 5);
    switch (step % 3) {
      case 0: s = apply_gate(s, ry(rng.uniform() * 6.0), {q}); break;
      case 1: s = apply_gate(s, rz(rng.uniform() * 6.0), {q}); break;
      default: s = apply_gate(s, basic_gate(GateKind::CNOT), {q, r}); break;
    }
  }
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
}

TEST_CASE("measure deterministic and Bell marginal") {
  Rng rng(1);
  const std::vector<Complex> one{0.0, 1.0};
  const MeasureResult m = measure(make_state(1, one), {1}, rng);
  CHECK(m.bits == std::vector<int>{1});
  CHECK(m.probability == doctest::Approx(1.0));
  CHECK(std::abs(m.collapsed[1] - 1.0) < 1e-15);

  const std::vector<Complex> bell{1.0, 0.0, 0.0, 1.0};
  const PureState phi = make_state(2, bell);
  int zeros = 0;
  for (int i = 0; i < 2000; ++i) {
    const MeasureResult r = measure(phi, {1}, rng);
    CHECK(std::abs(r.probability - 0.5) < 1e-15);
    const std::size_t idx = r.bits[0] == 0 ? 0 : 3;
    CHECK(std::abs(std::abs(r.collapsed[idx]) - 1.0) < 1e-15);
    zeros += r.bits[0] == 0;
  }
  // 2000 fair draws: 5 sigma is about 112.
  CHECK(std::abs(zeros - 1000) < 112);
}

TEST_CASE("measurement probabilities are complete and match project") {
  Rng rng(5);
  const PureState s = random_state(4, rng);
  const std::vector<int> qubits{3, 1};
  double total = 0.0;
  for (int b0 = 0; b0 < 2; ++b0) {
    for (int b1 = 0; b1 < 2; ++b1) {
      const std::vector<int> bits{b0, b1};
      total += project(s, qubits, bits).weight;
    }
  }
  CHECK(std::abs(total - 1.0) < 1e-14);

  for (int i = 0; i < 50; ++i) {
    const MeasureResult m = measure(s, {3, 1}, rng);
    const UnnormalizedBranch b = project(s, qubits, m.bits);
    CHECK(std::abs(m.probability - b.weight) < 1e-15);
    CHECK(fidelity_up_to_phase(m.collapsed, normalize(b)) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("project basis cases") {
  const std::vector<Complex> v{0.0, 1.0, 0.0, 0.0};  // |01>
  const PureState s = make_state(2, v);
  const std::vector<int> q{1};
  const std::vector<int> zero{0}, one{1};
  const UnnormalizedBranch b0 = project(s, q, zero);
  CHECK(b0.weight == doctest::Approx(1.0));
  CHECK(std::abs(b0.amplitudes[1] - 1.0) < 1e-15);
  CHECK(project(s, q, one).weight == 0.0);
  CHECK_THROWS(normalize(project(s, q, one)));
}

TEST_CASE("measure is reproducible for equal seeds") {
  Rng setup(9);
  const PureState s = random_state(3, setup);
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(measure(s, {1, 2, 3}, a).bits == measure(s, {1, 2, 3}, b).bits);
  }
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}

TEST_CASE("slice picks the requested sub-block") {
  // |q1 q2 q3> with amplitude = index
  std::vector<Complex> v(8);
  for (int i = 0; i < 8; ++i) v[static_cast<std::size_t>(i)] = i;
  const std::vector<int> keep{3, 1};
  const std::vector<int> rest{1};  // q2 = 1
  const auto got = slice(v, 3, keep, rest);
  // (q3,q1) = 00 -> 010, 01 -> 110, 10 -> 011, 11 -> 111
  CHECK(got == std::vector<Complex>{2.0, 6.0, 3.0, 7.0});
}

TEST_CASE("fidelity up to phase") {
  Rng rng(13);
  const PureState s = random_state(2, rng);
  CHECK(fidelity_up_to_phase(s, s) == doctest::Approx(1.0));
  std::vector<Complex> neg(s.amplitudes().begin(), s.amplitudes().end());
  for (auto& z : neg) z *= std::polar(1.0, 2.1);
  CHECK(fidelity_up_to_phase(s, PureState(2, neg)) == doctest::Approx(1.0));
  const std::vector<Complex> z0{1.0, 0.0}, z1{0.0, 1.0};
  CHECK(fidelity_up_to_phase(make_state(1, z0), make_state(1, z1)) == 0.0);
}

TEST_CASE("bit index helpers") {
  const std::vector<int> bits{1, 0, 1, 1};
  CHECK(bits_to_index(bits) == 11);
  CHECK(index_to_bits(11, 4) == bits);
}

}  // TEST_SUITE
