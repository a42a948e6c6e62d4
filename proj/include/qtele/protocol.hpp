#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtele/gates.hpp"
#include "qtele/statevector.hpp"

namespace qtele {

// Register layout for the full protocol: Alice holds 1-4, Bob holds 5, 6 and
// the ancilla.
inline constexpr int kRegisterWidth = 7;
inline constexpr int kAncilla = 7;
inline constexpr double kInputNormTol = 1e-12;
inline constexpr double kFidelityTol = 1e-10;

/// a|00> + b|01> + c|10> + d|11> on the sender's pair.
struct InputState {
  Complex a{1.0, 0.0};
  Complex b{};
  Complex c{};
  Complex d{};

  std::array<Complex, 4> amplitudes() const { return {a, b, c, d}; }
  void validate() const;
};

InputState make_input(Complex a, Complex b, Complex c, Complex d);
InputState random_input(Rng& rng);

enum class BellOutcome : int { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

/// Joint result of both Bell measurements: k = 4 * (pair 2,3) + (pair 1,4).
class OutcomeIndex {
 public:
  explicit OutcomeIndex(int k);
  OutcomeIndex(BellOutcome pair23, BellOutcome pair14);

  int value() const { return k_; }
  BellOutcome pair23() const { return static_cast<BellOutcome>(k_ / 4); }
  BellOutcome pair14() const { return static_cast<BellOutcome>(k_ % 4); }

  friend bool operator==(OutcomeIndex, OutcomeIndex) = default;

 private:
  int k_;
};

enum class Pauli { I, X, Z, ZX };  // ZX: X first, then Z

Matrix2 pauli_matrix(Pauli p);
const char* pauli_name(Pauli p);

struct Correction {
  Pauli on5 = Pauli::I;
  Pauli on6 = Pauli::I;

  friend bool operator==(const Correction&, const Correction&) = default;
};

using CorrectionTable = std::array<Correction, 16>;

/// Frozen table, reproduced by derive_correction_table.
const CorrectionTable& correction_table();
Correction correction_for(OutcomeIndex k);

/// Exhaustive search over {I, X, Z, ZX} on qubits 5 and 6: for each k, the
/// unique product that maps the purified state for every probe input back to
/// the probe up to global phase. Throws if a k has no or several solutions.
CorrectionTable derive_correction_table(std::span<const InputState> probes);

PureState prepare_input(const InputState& s);

enum class ChannelMode { Direct, Circuit };

/// Four-qubit channel state on qubits (3,4,5,6), register-local numbering
/// 1..4.
PureState prepare_channel(const ChannelParams& p, ChannelMode mode);

/// Channel preparation circuit from |0000> (register-local numbering 1..4).
GateSequence channel_circuit(const ChannelParams& p);

/// input (x) channel (x) |0>_ancilla on the 7-qubit protocol register.
PureState initial_register(const InputState& s, const ChannelParams& p,
                           ChannelMode mode = ChannelMode::Direct);

/// Maps the Bell basis of (first, second) to the computational basis:
/// CNOT(first -> second) then H(first).
PureState bell_basis_rotation(const PureState& state, std::array<int, 2> pair);

/// Bits (m_first, m_second) after the basis rotation -> m_first + 2 m_second.
BellOutcome decode_bell(int m_first, int m_second);
std::array<int, 2> encode_bell(BellOutcome b);

struct BellMeasureResult {
  BellOutcome outcome;
  double probability = 0.0;
  PureState collapsed;
};

BellMeasureResult bell_measure(const PureState& state, std::array<int, 2> pair,
                               Rng& rng);

/// Unnormalized branch of the 7-qubit register for joint outcome k after both
/// basis rotations.
UnnormalizedBranch bell_branch(const PureState& rotated_register,
                               OutcomeIndex k);

/// Analytic (unnormalized) state of qubits 5, 6 after Alice's outcome k.
UnnormalizedBranch collapse_oracle(OutcomeIndex k, const InputState& s,
                                   const ChannelParams& p);

/// Analytic normalized state of qubits 5, 6 after U0 and ancilla outcome 0,
/// before correction (up to the common factor alpha / 2).
std::array<Complex, 4> purified_oracle(OutcomeIndex k, const InputState& s);

/// Applies the correction for k to qubits (q5, q6) of `state`.
PureState apply_correction(const PureState& state, OutcomeIndex k, int q5,
                           int q6);

struct RecoveryResult {
  std::optional<PureState> state;  // qubits 5, 6 on success
  double ancilla0_probability = 0.0;
  bool success() const { return state.has_value(); }
};

/// Bob's side on a 3-qubit state over (5, 6, ancilla) with the ancilla in |0>.
RecoveryResult bob_recover(const PureState& bob_state, OutcomeIndex k,
                           const ChannelParams& p, Rng& rng);

/// Closed form: 4 alpha^2.
double success_probability(const ChannelParams& p);

struct BranchSuccess {
  double outcome_probability = 0.0;   // P(k)
  double ancilla0_probability = 0.0;  // P(ancilla = 0 | k)
  double joint() const { return outcome_probability * ancilla0_probability; }
};

/// Exact per-branch success bookkeeping by projection of the simulated
/// register; no sampling.
std::array<BranchSuccess, 16> enumerate_branches(const InputState& s,
                                                 const ChannelParams& p);

struct TrialRecord {
  std::uint64_t seed = 0;
  int outcome = 0;
  int ancilla = 0;
  bool success = false;
  double fidelity = 0.0;
  double branch_probability = 0.0;
};

TrialRecord run_trial(const InputState& s, const ChannelParams& p,
                      std::uint64_t seed);

struct BatchSummary {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::array<std::uint64_t, 16> outcome_counts{};
  double min_success_fidelity = 1.0;
  double success_rate() const {
    return trials ? static_cast<double>(successes) / static_cast<double>(trials)
                  : 0.0;
  }
};

/// Trial i uses derive_seed(seed, i).
BatchSummary run_batch(const InputState& s, const ChannelParams& p,
                       std::uint64_t trials, std::uint64_t seed);

enum class ControlMode { Coherent, Classical };

struct JointEntry {
  int outcome = 0;
  int ancilla = 0;
  bool perfect = false;  // fidelity to the input >= 1 - kFidelityTol
  double probability = 0.0;
  std::vector<Complex> final_state;  // normalized qubits 5, 6; empty if p == 0
};

/// Exact joint distribution over (k, ancilla, fidelity class), ordered by k
/// then ancilla.
///
/// Coherent mode leaves Alice's qubits unmeasured and applies the corrections
/// as CNOT / CZ gates controlled by her rotated qubits. Classical mode
/// projects on k first and applies the table correction.
std::vector<JointEntry> run_deferred_comparison(const InputState& s,
                                                const ChannelParams& p,
                                                ControlMode mode);

struct DistributionDiff {
  double probability = 0.0;  // max |P_a - P_b|
  double state = 0.0;        // max state deviation up to phase
  bool classes_match = true;
};

DistributionDiff compare_distributions(const std::vector<JointEntry>& a,
                                       const std::vector<JointEntry>& b);

}  // namespace qtele
