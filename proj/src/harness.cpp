#include "qtele/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qtele/barenco.hpp"

namespace qtele {

namespace {

using Clock = std::chrono::steady_clock;
using ojson = nlohmann::ordered_json;

// Two-sided 3-sigma band used for every Monte-Carlo interval.
constexpr double kIntervalZ = 3.0;
// Random channels and inputs are drawn from streams well away from the
// per-trial streams (which start at 0).
constexpr std::uint64_t kChannelStream = 1ULL << 40;
constexpr std::uint64_t kInputStream = 1ULL << 41;
constexpr int kRandomChannelsU0 = 100;
constexpr int kRandomChannelsNetwork = 20;
constexpr int kRandomInputsOutcomes = 20;

ojson channel_json(const ChannelParams& p) {
  return ojson{{"alpha", p.alpha},
               {"beta", p.beta},
               {"gamma", p.gamma},
               {"kappa", p.kappa}};
}

ojson complex_array(std::span<const Complex> v) {
  ojson a = ojson::array();
  for (const Complex& z : v) a.push_back({z.real(), z.imag()});
  return a;
}

class ReportBuilder {
 public:
  ReportBuilder(std::string command, const RunConfig& config)
      : start_(Clock::now()) {
    report_["command"] = std::move(command);
    report_["config"] = config_to_json(config);
    report_["checks"] = ojson::array();
    report_["results"] = ojson::object();
  }

  bool check(const std::string& name, bool pass, double metric,
             double threshold, bool gating = true) {
    ojson c{{"name", name},
            {"status", pass ? "pass" : "fail"},
            {"metric", metric},
            {"threshold", threshold}};
    if (!gating) c["gating"] = false;
    report_["checks"].push_back(std::move(c));
    if (gating && !pass) ok_ = false;
    return pass;
  }

  ojson& results() { return report_["results"]; }
  bool ok() const { return ok_; }

  Report finish(const std::string& status) {
    report_["status"] = status;
    const auto ms = std::chrono::duration<double, std::milli>(Clock::now() -
                                                              start_)
                        .count();
    report_["timing"] = ojson{{"elapsed_ms", ms}};
    return std::move(report_);
  }

 private:
  Report report_;
  Clock::time_point start_;
  bool ok_ = true;
};

std::vector<ChannelParams> channels_for(const RunConfig& config, int extra) {
  std::vector<ChannelParams> out{config.channel};
  Rng rng(derive_seed(config.seed, kChannelStream));
  for (int i = 0; i < extra; ++i) out.push_back(random_channel(rng));
  return out;
}

std::vector<InputState> inputs_for(const RunConfig& config, int extra) {
  std::vector<InputState> out{config.input};
  Rng rng(derive_seed(config.seed, kInputStream));
  for (int i = 0; i < extra; ++i) out.push_back(random_input(rng));
  return out;
}

Complex parse_complex(const nlohmann::json& z) {
  if (z.is_number()) return {z.get<double>(), 0.0};
  if (!z.is_array() || z.size() != 2) {
    throw ConfigError("complex values must be [re, im] pairs");
  }
  return {z.at(0).get<double>(), z.at(1).get<double>()};
}

// Chi-square critical value at upper-tail probability 1e-3 via the
// Wilson-Hilferty approximation.
double chi_square_critical(int dof) {
  const double k = dof;
  const double z = 3.090232306167813;
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j, bool renormalize) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("input")) {
      const auto& in = j.at("input");
      if (!in.is_array() || in.size() != 4) {
        throw ConfigError("input must hold four [re, im] amplitudes");
      }
      std::array<Complex, 4> v;
      double n2 = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        v[i] = parse_complex(in.at(i));
        n2 += std::norm(v[i]);
      }
      if (renormalize && n2 > 0.0) {
        for (Complex& z : v) z /= std::sqrt(n2);
      }
      c.input = InputState{v[0], v[1], v[2], v[3]};
    }
    if (j.contains("channel")) {
      const auto& ch = j.at("channel");
      ChannelParams p{ch.at("alpha").get<double>(), ch.at("beta").get<double>(),
                      ch.at("gamma").get<double>(),
                      ch.at("kappa").get<double>()};
      const double n = std::sqrt(p.alpha * p.alpha + p.beta * p.beta +
                                 p.gamma * p.gamma + p.kappa * p.kappa);
      if (renormalize && n > 0.0) {
        p = {p.alpha / n, p.beta / n, p.gamma / n, p.kappa / n};
      }
      c.channel = p;
    }
    if (j.contains("trials")) {
      const auto& t = j.at("trials");
      if (!t.is_number_integer() || t.get<std::int64_t>() <= 0) {
        throw ConfigError("trials must be a positive integer");
      }
      c.trials = t.get<std::uint64_t>();
    }
    if (j.contains("seed")) {
      const auto& s = j.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
        throw ConfigError("seed must be an unsigned 64-bit integer");
      }
      c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      const auto set = [&](const char* key, double& field) {
        if (!t.contains(key)) return;
        const double v = t.at(key).get<double>();
        if (!(v > 0.0)) throw ConfigError(std::string("tolerance ") + key +
                                          " must be positive");
        field = v;
      };
      set("unitarity", c.tol.unitarity);
      set("branch", c.tol.branch);
      set("purified", c.tol.purified);
      set("fidelity", c.tol.fidelity);
      set("network", c.tol.network);
      set("barenco", c.tol.barenco);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  try {
    c.input.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) +
                      " (pass --renormalize to normalize it)");
  }
  if (auto v = c.channel.violation()) throw ConfigError("channel: " + *v);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool renormalize) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j, renormalize);
}

ojson config_to_json(const RunConfig& c) {
  const auto in = c.input.amplitudes();
  return ojson{{"input", complex_array(in)},
               {"channel", channel_json(c.channel)},
               {"trials", c.trials},
               {"seed", c.seed},
               {"tolerances",
                {{"unitarity", c.tol.unitarity},
                 {"branch", c.tol.branch},
                 {"purified", c.tol.purified},
                 {"fidelity", c.tol.fidelity},
                 {"network", c.tol.network},
                 {"barenco", c.tol.barenco}}}};
}

CommandResult cmd_verify_u0(const RunConfig& config, const VerifyHooks& hooks) {
  ReportBuilder rb("verify-u0", config);
  const auto channels = channels_for(config, kRandomChannelsU0);
  double worst = 0.0;
  ojson per_channel = ojson::array();
  for (std::size_t i = 0; i < channels.size(); ++i) {
    Matrix u0 = build_u0(channels[i]).matrix();
    if (i == 0 && hooks.tamper_u0) hooks.tamper_u0(u0);
    const double dev = unitarity_deviation(u0);
    worst = std::max(worst, dev);
    per_channel.push_back({{"channel", channel_json(channels[i])},
                           {"unitarity_deviation", dev}});
    if (i == 0) {
      rb.check("config_channel_unitarity", dev < config.tol.unitarity, dev,
               config.tol.unitarity);
      rb.results()["u0"] = matrix_to_json(u0);
    }
  }
  rb.check("random_channels_unitarity", worst < config.tol.unitarity, worst,
           config.tol.unitarity);
  rb.results()["channels"] = std::move(per_channel);
  const bool ok = rb.ok();
  return {rb.finish(ok ? "pass" : "fail"), ok ? 0 : 1};
}

CommandResult cmd_verify_network(const RunConfig& config, bool strict,
                              const VerifyHooks& hooks) {
  ReportBuilder rb("verify-network", config);
  const double tol = config.tol.network;

  // Comparator self-checks: identical inputs give zero, and a 1e-3 change in
  // one entry is seen.
  {
    const Matrix u0 = build_u0(config.channel).matrix();
    Matrix bumped = u0;
    bumped(3, 4) += 1e-3;
    const double same = deviation_up_to_phase(u0, u0);
    const double moved = deviation_up_to_phase(u0, bumped);
    rb.check("comparator_identity", same == 0.0, same, 0.0);
    rb.check("comparator_detects_perturbation",
             std::abs(moved - 1e-3) < 1e-6, moved, 1e-3);
  }

  const auto& tokens = u0_network_tokens();
  rb.results()["network_length"] = tokens.size();
  rb.results()["printed_first"] = tokens.front();
  rb.results()["printed_last"] = tokens.back();

  // Composition must be bit-for-bit deterministic.
  const GateSequence seq = u0_network(config.channel);
  const Matrix once = compose_matrix(seq);
  const Matrix twice = compose_matrix(u0_network(config.channel));
  rb.check("composition_deterministic", once == twice,
           max_deviation(once, twice), 0.0);

  const auto channels = channels_for(config, kRandomChannelsNetwork);
  ojson per_channel = ojson::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    Matrix u0 = build_u0(channels[i]).matrix();
    if (i == 0 && hooks.tamper_u0) hooks.tamper_u0(u0);
    const Matrix composed = compose_matrix(u0_network(channels[i]));
    const double d = deviation_up_to_phase(u0, composed);
    const double d_exact = max_deviation(u0, composed);
    worst = std::max(worst, d);
    per_channel.push_back({{"channel", channel_json(channels[i])},
                           {"deviation_up_to_phase", d},
                           {"deviation_exact", d_exact}});
  }
  rb.results()["channels"] = std::move(per_channel);
  const bool claim_holds = worst < tol;
  rb.check("network_matches_u0", claim_holds, worst, tol);
  rb.results()["claim"] = claim_holds ? "verified" : "unverified";

  const bool ok = rb.ok();
  const int code = ok || !strict ? 0 : 1;
  return {rb.finish(ok ? "pass" : "fail"), code};
}

CommandResult cmd_verify_barenco(
    const RunConfig& config,
    const std::optional<std::filesystem::path>& gates_out) {
  ReportBuilder rb("verify-barenco", config);
  const double tol = config.tol.barenco;
  const UBlocks u = build_u_blocks(config.channel);
  const Matrix2 x = basic_gate(GateKind::X).matrix();

  struct Factor {
    std::string name;
    Matrix2 base;
    std::array<int, 2> controls;
    int target;
  };
  const std::vector<Factor> factors{
      {"C12", x, {1, 2}, 3},      {"C23", x, {2, 3}, 1},
      {"C13", x, {1, 3}, 2},      {"CCU1_23", u.u1, {2, 3}, 1},
      {"CCU2_13", u.u2, {1, 3}, 2}, {"CCU3_12", u.u3, {1, 2}, 3},
  };
  ojson per_factor = ojson::array();
  for (const Factor& f : factors) {
    const auto flat = decompose_ccu(f.base, f.controls, f.target);
    const Matrix rebuilt = compose_primitives(flat, 3);
    const Matrix original = build_ccu(f.base, f.controls, f.target).matrix();
    const double d = deviation_up_to_phase(original, rebuilt);
    const GateCounts n = count_gates(flat);
    rb.check("flatten_" + f.name, d < tol, d, tol);
    per_factor.push_back({{"factor", f.name},
                          {"deviation", d},
                          {"single_qubit_gates", n.single},
                          {"cnot_gates", n.cnot}});
  }
  rb.results()["factors"] = std::move(per_factor);

  const GateSequence seq = u0_network(config.channel);
  const auto flat = flatten(seq);
  const double d_full = deviation_up_to_phase(compose_matrix(seq),
                                              compose_primitives(flat, 3));
  const double d_u0 = deviation_up_to_phase(build_u0(config.channel).matrix(),
                                            compose_primitives(flat, 3));
  rb.check("flatten_network", d_full < tol, d_full, tol);
  rb.results()["network_deviation_vs_u0"] = d_u0;

  const GateCounts n = count_gates(flat);
  rb.results()["network_gate_count"] = {{"single_qubit_gates", n.single},
                                        {"cnot_gates", n.cnot},
                                        {"total", n.total()}};
  if (gates_out) {
    std::ofstream os(*gates_out);
    if (!os) throw ConfigError("cannot write gate file " + gates_out->string());
    write_primitives(os, flat);
    rb.results()["gates_file"] = gates_out->string();
  }

  const bool ok = rb.ok();
  return {rb.finish(ok ? "pass" : "fail"), ok ? 0 : 1};
}

CommandResult cmd_verify_outcomes(const RunConfig& config) {
  ReportBuilder rb("verify-outcomes", config);
  const auto inputs = inputs_for(config, kRandomInputsOutcomes);
  const ChannelParams& p = config.channel;
  const UnitaryMatrix u0 = build_u0(p);

  double worst_branch = 0.0, worst_purified = 0.0, worst_fidelity_gap = 0.0;
  ojson per_outcome = ojson::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const InputState& s = inputs[i];
    const PureState input = prepare_input(s);
    const PureState rotated = bell_basis_rotation(
        bell_basis_rotation(initial_register(s, p), {2, 3}), {1, 4});
    for (int kv = 0; kv < 16; ++kv) {
      const OutcomeIndex k(kv);
      const UnnormalizedBranch branch = bell_branch(rotated, k);
      const auto [m2, m3] = encode_bell(k.pair23());
      const auto [m1, m4] = encode_bell(k.pair14());
      const std::array<int, 2> pair56{5, 6};
      const std::array<int, 5> rest{m1, m2, m3, m4, 0};
      const auto simulated = slice(branch.amplitudes, kRegisterWidth, pair56, rest);
      const UnnormalizedBranch oracle = collapse_oracle(k, s, p);
      const double d_branch = max_deviation(simulated, oracle.amplitudes);

      // Purify, keep the ancilla-0 part, and compare with the analytic form.
      const std::array<int, 3> bob{5, 6, kAncilla};
      const PureState purified = apply_gate(normalize(branch), u0, bob);
      const std::array<int, 1> anc{kAncilla};
      const std::array<int, 1> zero{0};
      const PureState success = normalize(project(purified, anc, zero));
      const auto bob_pair = slice(success.amplitudes(), kRegisterWidth, pair56, rest);
      const auto expected_raw = purified_oracle(k, s);
      const PureState expected = make_state(2, expected_raw);
      const double d_purified = max_deviation(bob_pair, expected.amplitudes());

      const PureState corrected =
          apply_correction(make_state(2, bob_pair), k, 1, 2);
      const double gap = 1.0 - fidelity_up_to_phase(corrected, input);

      worst_branch = std::max(worst_branch, d_branch);
      worst_purified = std::max(worst_purified, d_purified);
      worst_fidelity_gap = std::max(worst_fidelity_gap, gap);
      if (i == 0) {
        const Correction c = correction_for(k);
        per_outcome.push_back({{"k", kv},
                               {"branch_deviation", d_branch},
                               {"purified_deviation", d_purified},
                               {"fidelity", 1.0 - gap},
                               {"correction",
                                {{"q5", pauli_name(c.on5)},
                                 {"q6", pauli_name(c.on6)}}}});
      }
    }
  }
  rb.check("branches_match_oracle", worst_branch < config.tol.branch,
           worst_branch, config.tol.branch);
  rb.check("purified_states_match_oracle",
           worst_purified < config.tol.purified, worst_purified,
           config.tol.purified);
  rb.check("corrections_restore_input", worst_fidelity_gap <= config.tol.fidelity,
           worst_fidelity_gap, config.tol.fidelity);

  const CorrectionTable derived = derive_correction_table(inputs);
  rb.check("correction_table_regenerates", derived == correction_table(),
           derived == correction_table() ? 0.0 : 1.0, 0.0);

  rb.results()["inputs_checked"] = inputs.size();
  rb.results()["outcomes"] = std::move(per_outcome);
  const bool ok = rb.ok();
  return {rb.finish(ok ? "pass" : "fail"), ok ? 0 : 1};
}

CommandResult cmd_run(const RunConfig& config) {
  ReportBuilder rb("run", config);
  const double analytic = success_probability(config.channel);
  const BatchSummary sum =
      run_batch(config.input, config.channel, config.trials, config.seed);
  const auto [lo, hi] = wilson_interval(sum.successes, sum.trials, kIntervalZ);
  const double rate = sum.success_rate();

  rb.check("analytic_within_interval", lo <= analytic && analytic <= hi,
           analytic, 0.0);
  const double fidelity_gap = sum.successes ? 1.0 - sum.min_success_fidelity : 0.0;
  rb.check("successful_trials_perfect", fidelity_gap <= config.tol.fidelity,
           fidelity_gap, config.tol.fidelity);

  // Histogram of k against the analytic branch weights.
  double chi2 = 0.0;
  int cells = 0;
  ojson hist = ojson::array();
  for (int kv = 0; kv < 16; ++kv) {
    const double w =
        collapse_oracle(OutcomeIndex(kv), config.input, config.channel).weight;
    const double expected = w * static_cast<double>(sum.trials);
    const auto observed =
        static_cast<double>(sum.outcome_counts[static_cast<std::size_t>(kv)]);
    if (expected > 0.0) {
      chi2 += (observed - expected) * (observed - expected) / expected;
      ++cells;
    }
    hist.push_back({{"k", kv},
                    {"count", sum.outcome_counts[static_cast<std::size_t>(kv)]},
                    {"analytic_probability", w}});
  }
  const int dof = std::max(1, cells - 1);
  const double critical = chi_square_critical(dof);
  rb.check("histogram_chi_square", chi2 <= critical, chi2, critical, false);

  auto& r = rb.results();
  r["trials"] = sum.trials;
  r["successes"] = sum.successes;
  r["empirical_success_rate"] = rate;
  r["interval"] = {{"method", "wilson"}, {"z", kIntervalZ}, {"low", lo},
                   {"high", hi}};
  r["analytic_success_probability"] = analytic;
  r["binomial_sigma"] =
      std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(sum.trials));
  r["chi_square"] = {{"statistic", chi2}, {"dof", dof}};
  r["histogram"] = std::move(hist);

  const bool ok = rb.ok();
  return {rb.finish(ok ? "pass" : "fail"), ok ? 0 : 1};
}

std::vector<double> parse_alpha_range(const std::string& text) {
  double start = 0.0, stop = 0.0;
  long count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
      count < 1 || !is.eof()) {
    throw ConfigError("alpha range must look like start:stop:count, got '" +
                      text + "'");
  }
  std::vector<double> out;
  for (long i = 0; i < count; ++i) {
    out.push_back(count == 1 ? start
                             : start + (stop - start) * static_cast<double>(i) /
                                           static_cast<double>(count - 1));
  }
  return out;
}

ChannelParams sweep_channel(double alpha, const std::array<double, 3>& w) {
  const double w2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
  if (!(w2 > 0.0)) throw ConfigError("completion weights must not all be zero");
  const double scale = std::sqrt(std::max(0.0, 1.0 - alpha * alpha) / w2);
  ChannelParams p{alpha, w[0] * scale, w[1] * scale, w[2] * scale};
  if (auto v = p.violation()) {
    throw ConfigError("alpha " + format_double(alpha) + ": " + *v);
  }
  return p;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const SweepSpec& spec) {
  if (spec.alphas.empty()) throw ConfigError("empty alpha grid");
  std::vector<ChannelParams> channels;
  for (double a : spec.alphas) channels.push_back(sweep_channel(a, spec.completion));

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    SweepRow row;
    row.alpha = spec.alphas[i];
    row.analytic = success_probability(channels[i]);
    row.trials = config.trials;
    row.seed = derive_seed(config.seed, i);
    row.empirical =
        run_batch(config.input, channels[i], config.trials, row.seed)
            .success_rate();
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "alpha,analytic,empirical,trials,seed\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha) + ',' + format_double(r.analytic) + ',' +
           format_double(r.empirical) + ',' + std::to_string(r.trials) + ',' +
           std::to_string(r.seed) + '\n';
  }
  return out;
}

Report sweep_report(const RunConfig& config, const SweepSpec& spec,
                    const std::vector<SweepRow>& rows) {
  ReportBuilder rb("sweep", config);
  rb.results()["completion"] = spec.completion;
  ojson out = ojson::array();
  for (const auto& r : rows) {
    out.push_back({{"alpha", r.alpha},
                   {"analytic", r.analytic},
                   {"empirical", r.empirical},
                   {"trials", r.trials},
                   {"seed", r.seed}});
  }
  rb.results()["rows"] = std::move(out);
  return rb.finish("pass");
}

std::pair<double, double> wilson_interval(std::uint64_t successes,
                                          std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

Report without_timing(Report report) {
  report.erase("timing");
  return report;
}

}  // namespace qtele
