#include "qtele/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qtele {

namespace {

double squared_norm(std::span<const Complex> amps) {
  double s = 0.0;
  for (const Complex& z : amps) s += std::norm(z);
  return s;
}

void check_qubits(std::span<const int> qubits, int n_qubits) {
  std::uint64_t seen = 0;
  for (int q : qubits) {
    if (q < 1 || q > n_qubits) {
      throw std::out_of_range("qubit " + std::to_string(q) +
                              " outside register of width " +
                              std::to_string(n_qubits));
    }
    const std::uint64_t bit = std::uint64_t{1} << (q - 1);
    if (seen & bit) {
      throw std::invalid_argument("duplicate qubit " + std::to_string(q));
    }
    seen |= bit;
  }
}

// Bit position (from the least significant end) of qubit q.
inline int shift_of(int q, int n_qubits) { return n_qubits - q; }

}  // namespace

PureState::PureState(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count out of range: " +
                                std::to_string(n_qubits));
  }
  amps_.assign(std::size_t{1} << n_qubits, Complex{});
  amps_[0] = 1.0;
}

PureState::PureState(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count out of range: " +
                                std::to_string(n_qubits));
  }
  if (amps_.size() != (std::size_t{1} << n_qubits)) {
    throw DimensionError("expected " +
                         std::to_string(std::size_t{1} << n_qubits) +
                         " amplitudes, got " + std::to_string(amps_.size()));
  }
  for (const Complex& z : amps_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("non-finite amplitude");
    }
  }
  const double n = std::sqrt(squared_norm(amps_));
  if (!(n > 0.0)) throw std::invalid_argument("zero-norm state");
  for (Complex& z : amps_) z /= n;
}

double PureState::norm() const { return std::sqrt(squared_norm(amps_)); }

PureState make_state(int n_qubits) { return PureState(n_qubits); }

PureState make_state(int n_qubits, std::span<const Complex> amplitudes) {
  return PureState(n_qubits,
                   std::vector<Complex>(amplitudes.begin(), amplitudes.end()));
}

PureState tensor(const PureState& s1, const PureState& s2) {
  std::vector<Complex> out;
  out.reserve(s1.dim() * s2.dim());
  for (const Complex& x : s1.amplitudes()) {
    for (const Complex& y : s2.amplitudes()) out.push_back(x * y);
  }
  return PureState(s1.n_qubits() + s2.n_qubits(), std::move(out));
}

void apply_matrix(std::span<Complex> amplitudes, int n_qubits,
                  const Matrix& gate, std::span<const int> targets) {
  check_qubits(targets, n_qubits);
  const auto k = static_cast<int>(targets.size());
  const auto gdim = std::size_t{1} << k;
  if (gate.rows() != static_cast<Eigen::Index>(gdim) ||
      gate.cols() != static_cast<Eigen::Index>(gdim)) {
    throw DimensionError("gate dimension " + std::to_string(gate.rows()) +
                         " does not match " + std::to_string(k) + " targets");
  }
  if (amplitudes.size() != (std::size_t{1} << n_qubits)) {
    throw DimensionError("amplitude array does not match register width");
  }

  // offsets[j]: register index bits contributed by gate basis index j.
  std::vector<std::size_t> offsets(gdim, 0);
  std::size_t target_mask = 0;
  for (std::size_t j = 0; j < gdim; ++j) {
    for (int t = 0; t < k; ++t) {
      const std::size_t gate_bit = (j >> (k - 1 - t)) & 1U;
      offsets[j] |= gate_bit << shift_of(targets[t], n_qubits);
    }
  }
  for (int q : targets) target_mask |= std::size_t{1} << shift_of(q, n_qubits);

  std::vector<Complex> in(gdim), out(gdim);
  for (std::size_t base = 0; base < amplitudes.size(); ++base) {
    if (base & target_mask) continue;
    for (std::size_t j = 0; j < gdim; ++j) in[j] = amplitudes[base | offsets[j]];
    for (std::size_t r = 0; r < gdim; ++r) {
      Complex acc{};
      for (std::size_t c = 0; c < gdim; ++c) {
        acc += gate(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) *
               in[c];
      }
      out[r] = acc;
    }
    for (std::size_t j = 0; j < gdim; ++j) amplitudes[base | offsets[j]] = out[j];
  }
}

PureState apply_gate(const PureState& state, const UnitaryMatrix& gate,
                     std::span<const int> targets) {
  std::vector<Complex> amps(state.amplitudes().begin(),
                            state.amplitudes().end());
  apply_matrix(amps, state.n_qubits(), gate.matrix(), targets);
  return PureState(PureState::Unchecked{}, state.n_qubits(), std::move(amps));
}

PureState apply_gate(const PureState& state, const UnitaryMatrix& gate,
                     std::initializer_list<int> targets) {
  return apply_gate(state, gate,
                    std::span<const int>(targets.begin(), targets.size()));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // 1 - uniform() lies in (0, 1], keeping the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

UnnormalizedBranch project(std::span<const Complex> amplitudes, int n_qubits,
                           std::span<const int> qubits,
                           std::span<const int> bits) {
  check_qubits(qubits, n_qubits);
  if (qubits.size() != bits.size()) {
    throw DimensionError("one outcome bit is required per projected qubit");
  }
  if (amplitudes.size() != (std::size_t{1} << n_qubits)) {
    throw DimensionError("amplitude array does not match register width");
  }
  std::size_t mask = 0, pattern = 0;
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) {
      throw std::invalid_argument("outcome bits must be 0 or 1");
    }
    const std::size_t b = std::size_t{1} << shift_of(qubits[i], n_qubits);
    mask |= b;
    if (bits[i]) pattern |= b;
  }
  UnnormalizedBranch out;
  out.n_qubits = n_qubits;
  out.amplitudes.assign(amplitudes.size(), Complex{});
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if ((i & mask) == pattern) out.amplitudes[i] = amplitudes[i];
  }
  out.weight = squared_norm(out.amplitudes);
  return out;
}

UnnormalizedBranch project(const PureState& state, std::span<const int> qubits,
                           std::span<const int> bits) {
  return project(state.amplitudes(), state.n_qubits(), qubits, bits);
}

UnnormalizedBranch project(const UnnormalizedBranch& branch,
                           std::span<const int> qubits,
                           std::span<const int> bits) {
  return project(branch.amplitudes, branch.n_qubits, qubits, bits);
}

PureState normalize(const UnnormalizedBranch& branch) {
  if (!(branch.weight > 0.0)) {
    throw std::invalid_argument("cannot normalize a zero-weight branch");
  }
  return PureState(branch.n_qubits, branch.amplitudes);
}

MeasureResult measure(const PureState& state, std::span<const int> qubits,
                      Rng& rng) {
  check_qubits(qubits, state.n_qubits());
  const int n = state.n_qubits();
  const int k = static_cast<int>(qubits.size());
  const std::size_t n_outcomes = std::size_t{1} << k;

  std::vector<double> probs(n_outcomes, 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    std::size_t outcome = 0;
    for (int t = 0; t < k; ++t) {
      outcome = (outcome << 1) | ((i >> shift_of(qubits[t], n)) & 1U);
    }
    probs[outcome] += std::norm(amps[i]);
  }

  // Inverse CDF. Negligible outcomes are skipped; if rounding leaves the draw
  // past the last cumulative value, the last admissible outcome is taken.
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = n_outcomes;
  std::size_t last_admissible = n_outcomes;
  for (std::size_t o = 0; o < n_outcomes; ++o) {
    if (probs[o] < kMinOutcomeProbability) continue;
    last_admissible = o;
    cumulative += probs[o];
    if (u < cumulative) {
      chosen = o;
      break;
    }
  }
  if (chosen == n_outcomes) chosen = last_admissible;

  std::vector<int> bits = index_to_bits(chosen, k);
  UnnormalizedBranch branch = project(state, qubits, bits);
  return MeasureResult{std::move(bits), branch.weight, normalize(branch)};
}

MeasureResult measure(const PureState& state, std::initializer_list<int> qubits,
                      Rng& rng) {
  return measure(state, std::span<const int>(qubits.begin(), qubits.size()),
                 rng);
}

std::vector<Complex> slice(std::span<const Complex> amplitudes, int n_qubits,
                           std::span<const int> keep,
                           std::span<const int> rest_bits) {
  check_qubits(keep, n_qubits);
  if (keep.size() + rest_bits.size() != static_cast<std::size_t>(n_qubits)) {
    throw DimensionError("slice needs one fixed bit per non-kept qubit");
  }
  std::vector<bool> kept(static_cast<std::size_t>(n_qubits) + 1, false);
  for (int q : keep) kept[static_cast<std::size_t>(q)] = true;

  std::size_t base = 0;
  std::size_t r = 0;
  for (int q = 1; q <= n_qubits; ++q) {
    if (kept[static_cast<std::size_t>(q)]) continue;
    if (rest_bits[r++]) base |= std::size_t{1} << shift_of(q, n_qubits);
  }

  const int k = static_cast<int>(keep.size());
  std::vector<Complex> out(std::size_t{1} << k);
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::size_t idx = base;
    for (int t = 0; t < k; ++t) {
      if ((j >> (k - 1 - t)) & 1U) idx |= std::size_t{1} << shift_of(keep[t], n_qubits);
    }
    out[j] = amplitudes[idx];
  }
  return out;
}

double fidelity_up_to_phase(std::span<const Complex> s1,
                            std::span<const Complex> s2) {
  if (s1.size() != s2.size()) throw DimensionError("state dimensions differ");
  Complex overlap{};
  for (std::size_t i = 0; i < s1.size(); ++i) overlap += std::conj(s1[i]) * s2[i];
  return std::min(1.0, std::abs(overlap));
}

double fidelity_up_to_phase(const PureState& s1, const PureState& s2) {
  if (s1.n_qubits() != s2.n_qubits()) {
    throw DimensionError("state register widths differ");
  }
  return fidelity_up_to_phase(s1.amplitudes(), s2.amplitudes());
}

std::uint64_t bits_to_index(std::span<const int> bits) {
  std::uint64_t idx = 0;
  for (int b : bits) idx = (idx << 1) | static_cast<std::uint64_t>(b != 0);
  return idx;
}

std::vector<int> index_to_bits(std::uint64_t index, int width) {
  std::vector<int> bits(static_cast<std::size_t>(width));
  for (int t = 0; t < width; ++t) {
    bits[static_cast<std::size_t>(t)] =
        static_cast<int>((index >> (width - 1 - t)) & 1U);
  }
  return bits;
}

}  // namespace qtele
