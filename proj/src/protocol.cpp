#include "qtele/protocol.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qtele {

namespace {

constexpr std::array<int, 4> kAlice{1, 2, 3, 4};
constexpr std::array<int, 3> kBob{5, 6, kAncilla};
constexpr std::array<int, 2> kBobPair{5, 6};
// Probability below which a branch's final state is not recorded.
constexpr double kNegligibleWeight = 1e-14;

// Branch k of the Bell-measurement collapse: qubits (5,6) carry
//   sign[j] * input[perm[j]] * channel[j] / 2,   j = 0..3,
// with input = (a, b, c, d) and channel = (alpha, beta, gamma, kappa).
struct BranchForm {
  std::array<int, 4> perm;
  std::array<int, 4> sign;
};

constexpr std::array<BranchForm, 16> kBranchForms{{
    {{0, 1, 2, 3}, {+1, +1, +1, +1}},  // Phi+ Phi+
    {{0, 1, 2, 3}, {+1, +1, -1, -1}},
    {{2, 3, 0, 1}, {+1, +1, +1, +1}},
    {{2, 3, 0, 1}, {-1, -1, +1, +1}},
    {{0, 1, 2, 3}, {+1, -1, +1, -1}},  // Phi- on (2,3)
    {{0, 1, 2, 3}, {+1, -1, -1, +1}},
    {{2, 3, 0, 1}, {+1, -1, +1, -1}},
    {{2, 3, 0, 1}, {-1, +1, +1, -1}},
    {{1, 0, 3, 2}, {+1, +1, +1, +1}},  // Psi+ on (2,3)
    {{1, 0, 3, 2}, {+1, +1, -1, -1}},
    {{3, 2, 1, 0}, {+1, +1, +1, +1}},
    {{3, 2, 1, 0}, {-1, -1, +1, +1}},
    {{1, 0, 3, 2}, {-1, +1, -1, +1}},  // Psi- on (2,3)
    {{1, 0, 3, 2}, {-1, +1, +1, -1}},
    {{3, 2, 1, 0}, {-1, +1, -1, +1}},
    {{3, 2, 1, 0}, {+1, -1, -1, +1}},
}};

constexpr CorrectionTable kCorrections{{
    {Pauli::I, Pauli::I},   {Pauli::Z, Pauli::I},   {Pauli::X, Pauli::I},
    {Pauli::ZX, Pauli::I},  {Pauli::I, Pauli::Z},   {Pauli::Z, Pauli::Z},
    {Pauli::X, Pauli::Z},   {Pauli::ZX, Pauli::Z},  {Pauli::I, Pauli::X},
    {Pauli::Z, Pauli::X},   {Pauli::X, Pauli::X},   {Pauli::ZX, Pauli::X},
    {Pauli::I, Pauli::ZX},  {Pauli::Z, Pauli::ZX},  {Pauli::X, Pauli::ZX},
    {Pauli::ZX, Pauli::ZX},
}};

// Computational bits of Alice's qubits 1..4 after both basis rotations.
std::array<int, 4> alice_bits(OutcomeIndex k) {
  const auto [m2, m3] = encode_bell(k.pair23());
  const auto [m1, m4] = encode_bell(k.pair14());
  return {m1, m2, m3, m4};
}

UnitaryMatrix controlled_z() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1.0;
  return UnitaryMatrix(m);
}

}  // namespace

void InputState::validate() const {
  double n2 = 0.0;
  for (const Complex& z : amplitudes()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("input amplitudes must be finite");
    }
    n2 += std::norm(z);
  }
  if (std::abs(n2 - 1.0) > kInputNormTol) {
    throw std::invalid_argument("input state is not normalized");
  }
}

InputState make_input(Complex a, Complex b, Complex c, Complex d) {
  InputState s{a, b, c, d};
  s.validate();
  return s;
}

InputState random_input(Rng& rng) {
  std::array<Complex, 4> v;
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (Complex& z : v) {
      z = Complex(rng.normal(), rng.normal());
      n2 += std::norm(z);
    }
  } while (!(n2 > 0.0));
  const double n = std::sqrt(n2);
  return InputState{v[0] / n, v[1] / n, v[2] / n, v[3] / n};
}

OutcomeIndex::OutcomeIndex(int k) : k_(k) {
  if (k < 0 || k > 15) {
    throw std::out_of_range("outcome index must be in 0..15, got " +
                            std::to_string(k));
  }
}

OutcomeIndex::OutcomeIndex(BellOutcome pair23, BellOutcome pair14)
    : OutcomeIndex(4 * static_cast<int>(pair23) + static_cast<int>(pair14)) {}

Matrix2 pauli_matrix(Pauli p) {
  Matrix2 x, z;
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  switch (p) {
    case Pauli::I: return Matrix2::Identity();
    case Pauli::X: return x;
    case Pauli::Z: return z;
    case Pauli::ZX: return z * x;
  }
  return Matrix2::Identity();
}

const char* pauli_name(Pauli p) {
  switch (p) {
    case Pauli::I: return "I";
    case Pauli::X: return "X";
    case Pauli::Z: return "Z";
    case Pauli::ZX: return "ZX";
  }
  return "?";
}

const CorrectionTable& correction_table() { return kCorrections; }

Correction correction_for(OutcomeIndex k) {
  return kCorrections[static_cast<std::size_t>(k.value())];
}

CorrectionTable derive_correction_table(std::span<const InputState> probes) {
  if (probes.empty()) throw std::invalid_argument("no probe inputs");
  constexpr std::array<Pauli, 4> all{Pauli::I, Pauli::X, Pauli::Z, Pauli::ZX};
  CorrectionTable table{};
  for (int k = 0; k < 16; ++k) {
    std::vector<Correction> found;
    for (Pauli p5 : all) {
      for (Pauli p6 : all) {
        const Matrix op = Eigen::kroneckerProduct(pauli_matrix(p5),
                                                  pauli_matrix(p6));
        bool ok = true;
        for (const InputState& s : probes) {
          const auto purified = purified_oracle(OutcomeIndex(k), s);
          Eigen::Vector4cd v(purified.data());
          const Eigen::Vector4cd out = op * v;
          const auto target = s.amplitudes();
          const double f = fidelity_up_to_phase(
              std::span<const Complex>(out.data(), 4), target);
          ok = ok && f >= 1.0 - kFidelityTol;
        }
        if (ok) found.push_back({p5, p6});
      }
    }
    if (found.size() != 1) {
      throw std::runtime_error("outcome " + std::to_string(k) + " has " +
                               std::to_string(found.size()) +
                               " candidate corrections");
    }
    table[static_cast<std::size_t>(k)] = found.front();
  }
  return table;
}

PureState prepare_input(const InputState& s) {
  s.validate();
  const auto amps = s.amplitudes();
  return make_state(2, amps);
}

GateSequence channel_circuit(const ChannelParams& p) {
  p.validate();
  const double a = p.alpha, b = p.beta, g = p.gamma, k = p.kappa;
  const double theta = 2 * std::atan2(std::sqrt(b * b + k * k),
                                      std::sqrt(a * a + g * g));
  const double phi0 = 2 * std::atan2(g, a);
  const double phi1 = 2 * std::atan2(k, b);
  GateSequence seq;
  seq.width = 4;
  seq.ops = {
      make_rotation_op(GateKind::Ry, theta, 1),
      // Ry(phi0) on qubit 2 if qubit 1 is 0, Ry(phi1) if it is 1.
      make_rotation_op(GateKind::Ry, (phi0 + phi1) / 2, 2),
      make_op(GateKind::CNOT, {1, 2}),
      make_rotation_op(GateKind::Ry, (phi0 - phi1) / 2, 2),
      make_op(GateKind::CNOT, {1, 2}),
      make_op(GateKind::CNOT, {2, 3}),
      make_op(GateKind::CNOT, {1, 4}),
  };
  return seq;
}

PureState prepare_channel(const ChannelParams& p, ChannelMode mode) {
  p.validate();
  if (mode == ChannelMode::Circuit) {
    return apply_sequence(make_state(4), channel_circuit(p));
  }
  std::vector<Complex> amps(16);
  amps[0b0000] = p.alpha;
  amps[0b1001] = p.beta;
  amps[0b0110] = p.gamma;
  amps[0b1111] = p.kappa;
  return PureState(4, std::move(amps));
}

PureState initial_register(const InputState& s, const ChannelParams& p,
                           ChannelMode mode) {
  return tensor(tensor(prepare_input(s), prepare_channel(p, mode)),
                make_state(1));
}

PureState bell_basis_rotation(const PureState& state, std::array<int, 2> pair) {
  const PureState after_cnot =
      apply_gate(state, basic_gate(GateKind::CNOT), {pair[0], pair[1]});
  return apply_gate(after_cnot, basic_gate(GateKind::H), {pair[0]});
}

BellOutcome decode_bell(int m_first, int m_second) {
  return static_cast<BellOutcome>(m_first + 2 * m_second);
}

std::array<int, 2> encode_bell(BellOutcome b) {
  const int v = static_cast<int>(b);
  return {v & 1, (v >> 1) & 1};
}

BellMeasureResult bell_measure(const PureState& state, std::array<int, 2> pair,
                               Rng& rng) {
  const PureState rotated = bell_basis_rotation(state, pair);
  MeasureResult m = measure(rotated, pair, rng);
  return BellMeasureResult{decode_bell(m.bits[0], m.bits[1]), m.probability,
                           std::move(m.collapsed)};
}

UnnormalizedBranch bell_branch(const PureState& rotated_register,
                               OutcomeIndex k) {
  const auto bits = alice_bits(k);
  return project(rotated_register, kAlice, bits);
}

UnnormalizedBranch collapse_oracle(OutcomeIndex k, const InputState& s,
                                   const ChannelParams& p) {
  const auto& form = kBranchForms[static_cast<std::size_t>(k.value())];
  const auto in = s.amplitudes();
  const std::array<double, 4> ch{p.alpha, p.beta, p.gamma, p.kappa};
  UnnormalizedBranch out;
  out.n_qubits = 2;
  out.amplitudes.resize(4);
  for (std::size_t j = 0; j < 4; ++j) {
    out.amplitudes[j] = static_cast<double>(form.sign[j]) *
                        in[static_cast<std::size_t>(form.perm[j])] * ch[j] / 2.0;
    out.weight += std::norm(out.amplitudes[j]);
  }
  return out;
}

std::array<Complex, 4> purified_oracle(OutcomeIndex k, const InputState& s) {
  const auto& form = kBranchForms[static_cast<std::size_t>(k.value())];
  const auto in = s.amplitudes();
  std::array<Complex, 4> out;
  for (std::size_t j = 0; j < 4; ++j) {
    out[j] = static_cast<double>(form.sign[j]) *
             in[static_cast<std::size_t>(form.perm[j])];
  }
  return out;
}

PureState apply_correction(const PureState& state, OutcomeIndex k, int q5,
                           int q6) {
  const Correction c = correction_for(k);
  PureState out = apply_gate(state, UnitaryMatrix(pauli_matrix(c.on5)), {q5});
  return apply_gate(out, UnitaryMatrix(pauli_matrix(c.on6)), {q6});
}

RecoveryResult bob_recover(const PureState& bob_state, OutcomeIndex k,
                           const ChannelParams& p, Rng& rng) {
  if (bob_state.n_qubits() != 3) {
    throw DimensionError("Bob's register must hold qubits 5, 6 and the ancilla");
  }
  const PureState purified = apply_gate(bob_state, build_u0(p), {1, 2, 3});
  const std::array<int, 1> anc{3};
  const std::array<int, 1> zero{0};
  RecoveryResult r;
  r.ancilla0_probability = project(purified, anc, zero).weight;

  MeasureResult m = measure(purified, anc, rng);
  if (m.bits[0] != 0) return r;
  const PureState corrected = apply_correction(m.collapsed, k, 1, 2);
  const std::array<int, 2> keep{1, 2};
  r.state = make_state(2, slice(corrected.amplitudes(), 3, keep, zero));
  return r;
}

double success_probability(const ChannelParams& p) {
  p.validate();
  return 4 * p.alpha * p.alpha;
}

std::array<BranchSuccess, 16> enumerate_branches(const InputState& s,
                                                 const ChannelParams& p) {
  const PureState rotated = bell_basis_rotation(
      bell_basis_rotation(initial_register(s, p), {2, 3}), {1, 4});
  const UnitaryMatrix u0 = build_u0(p);
  const std::array<int, 1> anc{kAncilla};
  const std::array<int, 1> zero{0};
  std::array<BranchSuccess, 16> out{};
  for (int k = 0; k < 16; ++k) {
    const UnnormalizedBranch branch = bell_branch(rotated, OutcomeIndex(k));
    auto& entry = out[static_cast<std::size_t>(k)];
    entry.outcome_probability = branch.weight;
    if (!(branch.weight > 0.0)) continue;
    const PureState purified = apply_gate(normalize(branch), u0, kBob);
    entry.ancilla0_probability = project(purified, anc, zero).weight;
  }
  return out;
}

TrialRecord run_trial(const InputState& s, const ChannelParams& p,
                      std::uint64_t seed) {
  Rng rng(seed);
  TrialRecord rec;
  rec.seed = seed;

  const PureState reg = initial_register(s, p);
  BellMeasureResult m23 = bell_measure(reg, {2, 3}, rng);
  BellMeasureResult m14 = bell_measure(m23.collapsed, {1, 4}, rng);
  const OutcomeIndex k(m23.outcome, m14.outcome);
  rec.outcome = k.value();
  rec.branch_probability = m23.probability * m14.probability;

  // Alice's qubits are now in a definite basis state; hand Bob his three.
  const auto bits = alice_bits(k);
  const std::array<int, 4> rest{bits[0], bits[1], bits[2], bits[3]};
  const PureState bob = make_state(
      3, slice(m14.collapsed.amplitudes(), kRegisterWidth, kBob, rest));

  const RecoveryResult r = bob_recover(bob, k, p, rng);
  rec.ancilla = r.success() ? 0 : 1;
  rec.success = r.success();
  if (r.success()) {
    rec.fidelity = fidelity_up_to_phase(*r.state, prepare_input(s));
  }
  return rec;
}

BatchSummary run_batch(const InputState& s, const ChannelParams& p,
                       std::uint64_t trials, std::uint64_t seed) {
  BatchSummary sum;
  sum.trials = trials;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const TrialRecord r = run_trial(s, p, derive_seed(seed, i));
    ++sum.outcome_counts[static_cast<std::size_t>(r.outcome)];
    if (r.success) {
      ++sum.successes;
      sum.min_success_fidelity = std::min(sum.min_success_fidelity, r.fidelity);
    }
  }
  return sum;
}

std::vector<JointEntry> run_deferred_comparison(const InputState& s,
                                                const ChannelParams& p,
                                                ControlMode mode) {
  const PureState input = prepare_input(s);
  const UnitaryMatrix u0 = build_u0(p);
  const PureState rotated = bell_basis_rotation(
      bell_basis_rotation(initial_register(s, p), {2, 3}), {1, 4});

  std::vector<JointEntry> out;
  out.reserve(32);
  const auto record = [&](int k, int anc, const UnnormalizedBranch& branch,
                          double probability) {
    JointEntry e;
    e.outcome = k;
    e.ancilla = anc;
    e.probability = probability;
    if (probability > kNegligibleWeight) {
      const auto kb = alice_bits(OutcomeIndex(k));
      const std::array<int, 5> rest{kb[0], kb[1], kb[2], kb[3], anc};
      const PureState final_state = make_state(
          2, slice(branch.amplitudes, kRegisterWidth, kBobPair, rest));
      e.final_state.assign(final_state.amplitudes().begin(),
                           final_state.amplitudes().end());
      e.perfect = fidelity_up_to_phase(final_state, input) >= 1.0 - kFidelityTol;
    }
    out.push_back(std::move(e));
  };

  if (mode == ControlMode::Coherent) {
    PureState reg = apply_gate(rotated, u0, kBob);
    // X corrections first, then Z, giving Z X on each of Bob's qubits.
    const UnitaryMatrix cnot = basic_gate(GateKind::CNOT);
    const UnitaryMatrix cz = controlled_z();
    reg = apply_gate(reg, cnot, {4, 5});
    reg = apply_gate(reg, cnot, {3, 6});
    reg = apply_gate(reg, cz, {1, 5});
    reg = apply_gate(reg, cz, {2, 6});
    const std::array<int, 5> measured{1, 2, 3, 4, kAncilla};
    for (int k = 0; k < 16; ++k) {
      const auto kb = alice_bits(OutcomeIndex(k));
      for (int anc = 0; anc < 2; ++anc) {
        const std::array<int, 5> bits{kb[0], kb[1], kb[2], kb[3], anc};
        const UnnormalizedBranch b = project(reg, measured, bits);
        record(k, anc, b, b.weight);
      }
    }
    return out;
  }

  const std::array<int, 1> anc_q{kAncilla};
  for (int k = 0; k < 16; ++k) {
    const OutcomeIndex idx(k);
    const UnnormalizedBranch branch = bell_branch(rotated, idx);
    if (!(branch.weight > 0.0)) {
      for (int anc = 0; anc < 2; ++anc) record(k, anc, branch, 0.0);
      continue;
    }
    const PureState corrected = apply_correction(
        apply_gate(normalize(branch), u0, kBob), idx, 5, 6);
    for (int anc = 0; anc < 2; ++anc) {
      const std::array<int, 1> bit{anc};
      const UnnormalizedBranch b = project(corrected, anc_q, bit);
      record(k, anc, b, branch.weight * b.weight);
    }
  }
  return out;
}

DistributionDiff compare_distributions(const std::vector<JointEntry>& a,
                                       const std::vector<JointEntry>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("distributions have different supports");
  }
  DistributionDiff d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].outcome != b[i].outcome || a[i].ancilla != b[i].ancilla) {
      throw std::invalid_argument("distribution entries are misaligned");
    }
    d.probability =
        std::max(d.probability, std::abs(a[i].probability - b[i].probability));
    if (a[i].final_state.empty() || b[i].final_state.empty()) continue;
    d.state = std::max(d.state, deviation_up_to_phase(a[i].final_state,
                                                      b[i].final_state));
    d.classes_match = d.classes_match && a[i].perfect == b[i].perfect;
  }
  return d;
}

}  // namespace qtele
