#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtele/gates.hpp"
#include "qtele/protocol.hpp"

namespace qtele {

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message)
      : std::runtime_error(message) {}
};

struct Tolerances {
  double unitarity = 1e-12;
  double branch = 1e-12;
  double purified = 1e-10;
  double fidelity = 1e-10;
  double network = 1e-9;
  double barenco = 1e-9;
};

struct RunConfig {
  InputState input{{0.5, 0.0}, {0.0, 0.5}, {-0.5, 0.0}, {0.5, 0.0}};
  ChannelParams channel{0.3, 0.4, 0.5, 0.70710678118654752};
  std::uint64_t trials = 100000;
  std::uint64_t seed = 20031;
  Tolerances tol;
};

/// Parses the config document. Inputs or channels that are not normalized are
/// rejected unless `renormalize` is set; every constraint is re-validated.
RunConfig config_from_json(const nlohmann::json& j, bool renormalize = false);
RunConfig load_config(const std::filesystem::path& path,
                      bool renormalize = false);
nlohmann::ordered_json config_to_json(const RunConfig& c);

using Report = nlohmann::ordered_json;

struct CommandResult {
  Report report;
  int exit_code = 0;
};

/// Test hooks for mutation checks of the comparators.
struct VerifyHooks {
  std::function<void(Matrix&)> tamper_u0;
};

CommandResult cmd_verify_u0(const RunConfig& config,
                            const VerifyHooks& hooks = {});

/// Checks the 148-factor network against the closed-form U0. A mismatch is
/// recorded in the report; the exit code is 1 only when `strict` is set.
CommandResult cmd_verify_network(const RunConfig& config, bool strict = false,
                              const VerifyHooks& hooks = {});

/// When `gates_out` is set, the flattened full network is written there in
/// the primitive text format.
CommandResult cmd_verify_barenco(
    const RunConfig& config,
    const std::optional<std::filesystem::path>& gates_out = std::nullopt);

CommandResult cmd_verify_outcomes(const RunConfig& config);

CommandResult cmd_run(const RunConfig& config);

struct SweepSpec {
  std::vector<double> alphas;
  // Relative weights of (beta, gamma, kappa) in the completion of each row.
  std::array<double, 3> completion{1.0, 1.0, 1.0};
};

/// Parses "start:stop:count" into an inclusive evenly spaced grid.
std::vector<double> parse_alpha_range(const std::string& text);

struct SweepRow {
  double alpha = 0.0;
  double analytic = 0.0;
  double empirical = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Channel used for one sweep row; throws ConfigError if invalid.
ChannelParams sweep_channel(double alpha, const std::array<double, 3>& weights);

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const SweepSpec& spec);
std::string sweep_csv(const std::vector<SweepRow>& rows);
Report sweep_report(const RunConfig& config, const SweepSpec& spec,
                    const std::vector<SweepRow>& rows);

/// Lower and upper bound of the Wilson score interval.
std::pair<double, double> wilson_interval(std::uint64_t successes,
                                          std::uint64_t trials, double z);

/// Report with the "timing" member removed.
Report without_timing(Report report);

}  // namespace qtele
