#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qtele/linalg.hpp"

namespace qtele {

// Qubits are numbered from 1. Qubit 1 is the most significant bit of the
// basis index: |q1 q2 ... qn> has index sum_i q_i * 2^(n-i).

inline constexpr int kMaxQubits = 16;
inline constexpr double kNormTol = 1e-12;
// Outcomes whose probability falls below this are never drawn.
inline constexpr double kMinOutcomeProbability = 1e-15;

/// Normalized pure state over an ordered register of qubits.
class PureState {
 public:
  /// |0...0> on n qubits.
  explicit PureState(int n_qubits);

  /// Normalizes `amplitudes`. Throws on length mismatch, non-finite entries or
  /// zero norm.
  PureState(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  Complex operator[](std::size_t index) const { return amps_[index]; }

  double norm() const;

 private:
  struct Unchecked {};
  PureState(Unchecked, int n_qubits, std::vector<Complex> amplitudes)
      : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {}

  friend PureState apply_gate(const PureState&, const UnitaryMatrix&,
                              std::span<const int>);

  int n_qubits_;
  std::vector<Complex> amps_;
};

/// Projected but not renormalized amplitudes over the full register.
/// `weight` is the squared norm, i.e. the probability of the branch.
struct UnnormalizedBranch {
  int n_qubits = 0;
  std::vector<Complex> amplitudes;
  double weight = 0.0;
};

PureState make_state(int n_qubits);
PureState make_state(int n_qubits, std::span<const Complex> amplitudes);

/// |s1> (x) |s2>, with s1 occupying the most significant qubits.
PureState tensor(const PureState& s1, const PureState& s2);

/// Applies `gate` to `targets`. The first target is the most significant bit
/// of the gate's row/column index.
PureState apply_gate(const PureState& state, const UnitaryMatrix& gate,
                     std::span<const int> targets);
PureState apply_gate(const PureState& state, const UnitaryMatrix& gate,
                     std::initializer_list<int> targets);

/// In-place kernel shared by apply_gate and the matrix composer. Performs no
/// unitarity check on `gate`.
void apply_matrix(std::span<Complex> amplitudes, int n_qubits,
                  const Matrix& gate, std::span<const int> targets);

/// Deterministic 64-bit random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard.
/// Uniform doubles are built from the top 53 bits so draws are identical on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();
  std::uint64_t next_u64() { return engine_(); }
  /// Standard normal via Box-Muller over uniform().
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer applied to seed + stream. Used to derive independent
/// per-trial and per-channel seeds from one configured seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct MeasureResult {
  std::vector<int> bits;  // one bit per measured qubit, in request order
  double probability = 0.0;
  PureState collapsed;
};

/// Projective computational-basis measurement of `qubits`.
///
/// Outcomes are ordered with the first listed qubit most significant and one
/// uniform draw selects an outcome by inverse CDF over that order.
MeasureResult measure(const PureState& state, std::span<const int> qubits,
                      Rng& rng);
MeasureResult measure(const PureState& state, std::initializer_list<int> qubits,
                      Rng& rng);

/// Zeroes every amplitude inconsistent with `bits` on `qubits`. The register
/// keeps its full width.
UnnormalizedBranch project(std::span<const Complex> amplitudes, int n_qubits,
                           std::span<const int> qubits,
                           std::span<const int> bits);
UnnormalizedBranch project(const PureState& state, std::span<const int> qubits,
                           std::span<const int> bits);
UnnormalizedBranch project(const UnnormalizedBranch& branch,
                           std::span<const int> qubits,
                           std::span<const int> bits);

/// Renormalizes a branch. Throws if the branch has zero weight.
PureState normalize(const UnnormalizedBranch& branch);

/// Amplitudes over `keep` (in the listed order) for the slice where every
/// other qubit takes the value given in `rest_bits` (ordered by ascending
/// qubit number). Amplitudes outside the slice are ignored.
std::vector<Complex> slice(std::span<const Complex> amplitudes, int n_qubits,
                           std::span<const int> keep,
                           std::span<const int> rest_bits);

/// |<s1|s2>|
double fidelity_up_to_phase(const PureState& s1, const PureState& s2);
double fidelity_up_to_phase(std::span<const Complex> s1,
                            std::span<const Complex> s2);

/// Basis index of bits (first bit most significant).
std::uint64_t bits_to_index(std::span<const int> bits);
std::vector<int> index_to_bits(std::uint64_t index, int width);

}  // namespace qtele
