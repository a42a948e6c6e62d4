#include "cli.hpp"

#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "qtele/harness.hpp"

namespace qtele::cli {

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out_path;
  std::string format;  // default: csv for sweep, json otherwise
  bool strict_network = false;
  bool renormalize = false;
  std::string gates_path;
  std::string alpha_range = "0.05:0.5:10";
  std::vector<double> alphas;
  std::vector<double> completion{1.0, 1.0, 1.0};
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Override the configured seed");
  cmd->add_option("--trials", o.trials, "Override the configured trial count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out_path, "Write the report here instead of stdout");
  cmd->add_option("--format", o.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--renormalize", o.renormalize,
                "Normalize input and channel instead of rejecting them");
}

RunConfig resolve_config(const Options& o) {
  RunConfig c = o.config_path.empty()
                    ? config_from_json(nlohmann::json::object(), o.renormalize)
                    : load_config(o.config_path, o.renormalize);
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  return c;
}

std::string checks_csv(const Report& r) {
  std::string out = "name,status,metric,threshold\n";
  for (const auto& c : r.at("checks")) {
    out += c.at("name").get<std::string>() + ',' +
           c.at("status").get<std::string>() + ',' + c.at("metric").dump() +
           ',' + c.at("threshold").dump() + '\n';
  }
  return out;
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path);
  if (!f) throw ConfigError("cannot write " + o.out_path);
  f << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Probabilistic two-qubit teleportation simulator and verifier",
               "qtele"};
  app.require_subcommand(1);
  Options o;

  auto* verify_u0 = app.add_subcommand("verify-u0", "Unitarity of U0");
  auto* verify_net = app.add_subcommand(
      "verify-network", "Compare the 148-factor gate network with U0");
  verify_net->alias("verify-eq36");
  auto* verify_barenco = app.add_subcommand(
      "verify-barenco", "Flatten the network to single-qubit gates and CNOTs");
  auto* verify_outcomes = app.add_subcommand(
      "verify-outcomes", "Check all 16 Bell branches and their corrections");
  auto* run_cmd = app.add_subcommand("run", "Seeded Monte-Carlo protocol run");
  auto* sweep = app.add_subcommand("sweep", "Success probability over alpha");

  for (auto* cmd :
       {verify_u0, verify_net, verify_barenco, verify_outcomes, run_cmd, sweep}) {
    add_common(cmd, o);
  }
  verify_net->add_flag("--strict-network,--strict-eq36", o.strict_network,
                       "Exit 1 when the network does not reproduce U0");
  verify_barenco->add_option("--gates", o.gates_path,
                             "Write the flattened network in text form");
  auto* range_opt = sweep->add_option("--range", o.alpha_range,
                                      "Alpha grid as start:stop:count");
  sweep->add_option("--alphas", o.alphas, "Explicit alpha values")
      ->delimiter(',')
      ->excludes(range_opt);
  sweep->add_option("--completion", o.completion,
                    "Relative weights of beta,gamma,kappa")
      ->delimiter(',')
      ->expected(3);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig config = resolve_config(o);

    if (sweep->parsed()) {
      SweepSpec spec;
      spec.alphas = o.alphas.empty() ? parse_alpha_range(o.alpha_range) : o.alphas;
      spec.completion = {o.completion[0], o.completion[1], o.completion[2]};
      const auto rows = cmd_sweep(config, spec);
      emit(o.format == "json" ? sweep_report(config, spec, rows).dump(2) + '\n'
                              : sweep_csv(rows),
           o, out);
      return 0;
    }

    CommandResult result;
    if (verify_u0->parsed()) {
      result = cmd_verify_u0(config);
    } else if (verify_net->parsed()) {
      result = cmd_verify_network(config, o.strict_network);
    } else if (verify_barenco->parsed()) {
      std::optional<std::filesystem::path> gates;
      if (!o.gates_path.empty()) gates = o.gates_path;
      result = cmd_verify_barenco(config, gates);
    } else if (verify_outcomes->parsed()) {
      result = cmd_verify_outcomes(config);
    } else {
      result = cmd_run(config);
    }
    emit(o.format == "csv" ? checks_csv(result.report)
                           : result.report.dump(2) + '\n',
         o, out);
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qtele::cli
