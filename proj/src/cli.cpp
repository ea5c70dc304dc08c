#include "beamtrain/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "beamtrain/codebook.hpp"
#include "beamtrain/errors.hpp"
#include "beamtrain/experiment.hpp"

namespace beamtrain {

namespace {

class IoError : public Error {
 public:
  using Error::Error;
};

struct SimulationFlags {
  std::string config_path;
  std::string out_path = "-";
  std::string trace_path;
  int threads = 1;
  // Raw flag text, fed to parse_config as overrides so flags and files share one parser.
  std::map<std::string, std::string> overrides;
  std::vector<std::string> methods = {"dynamic", "baseline_subtraction"};
};

void add_simulation_flags(CLI::App& cmd, SimulationFlags& flags) {
  cmd.add_option("-c,--config", flags.config_path, "Experiment config file (key = value)");
  cmd.add_option("-o,--out", flags.out_path, "Output CSV path, '-' for stdout");
  cmd.add_option("--threads", flags.threads, "Worker threads, 0 = all cores");
  const std::pair<const char*, const char*> keys[] = {
      {"--Nt", "Nt"}, {"--Nr", "Nr"},         {"--L", "L"},
      {"--Ld", "L_d"}, {"--S0", "S0"},       {"--P", "P"},
      {"--snr", "snr_db_list"}, {"--trials", "trials"}, {"--seed", "seed"},
      {"--angle-mode", "angle_mode"},
  };
  for (const auto& [flag, key] : keys) {
    std::string k = key;
    cmd.add_option_function<std::string>(
        flag, [&flags, k](const std::string& value) { flags.overrides[k] = value; },
        fmt::format("Override config key {}", key));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig load_config(const SimulationFlags& flags) {
  const std::string text = flags.config_path.empty() ? std::string{} : read_file(flags.config_path);
  return parse_config(text, flags.overrides);
}

template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot open '{}' for writing", path));
  write(file);
  file.flush();
  if (!file) throw IoError(fmt::format("failed writing '{}'", path));
}

void dump_traces(const ExperimentConfig& cfg, const std::string& path, std::ostream& out) {
  with_output(path, out, [&](std::ostream& os) {
    os << "# path layer mt mr |y|\n";
    for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
      Rng rng = trial_rng(cfg.seed, si, 0);
      const ChannelRealization ch =
          draw_channel(cfg.nt, cfg.nr, cfg.num_paths, cfg.angle_mode, rng);
      MeasurementModel mm(cfg.power, snr_to_noise(cfg.snr_db_list[si], cfg.power), std::move(rng));
      TrainingOutcome outcome;
      switch (cfg.method) {
        case Method::dynamic:
          outcome = train_dynamic(cfg.nt, cfg.nr, cfg.paths_to_detect, cfg.start_layer, ch, mm);
          break;
        case Method::baseline_subtraction:
          outcome = train_baseline_subtraction(cfg.nt, cfg.nr, cfg.paths_to_detect,
                                               cfg.start_layer, ch, mm);
          break;
        case Method::exhaustive:
          outcome = train_exhaustive(cfg.paths_to_detect, ch, mm);
          break;
      }
      os << fmt::format("# method {} snr_db {} trial 0\n", to_string(cfg.method),
                        cfg.snr_db_list[si]);
      write_trace(os, outcome);
    }
  });
}

int report(std::ostream& err, ExitCode code, std::string_view what) {
  err << "beamtrain: " << what << '\n';
  return static_cast<int>(code);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical-codebook beam training simulator", "beamtrain"};
  app.require_subcommand(1);

  SimulationFlags run_flags;
  std::string run_method;
  auto* run = app.add_subcommand("run", "Monte Carlo success rate of one method, written as CSV");
  add_simulation_flags(*run, run_flags);
  run->add_option_function<std::string>(
      "--method", [&](const std::string& v) { run_flags.overrides["method"] = v; },
      "dynamic | baseline_subtraction | exhaustive");
  run->add_option("--trace", run_flags.trace_path,
                  "Also dump the measurement trace of trial 0 at every SNR point");

  SimulationFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Run several methods on one config, combined CSV");
  add_simulation_flags(*sweep, sweep_flags);
  sweep->add_option("--methods", sweep_flags.methods, "Methods to compare")->delimiter(',');

  int oh_nt = 32, oh_ld = 3, oh_s0 = 2, oh_k = 2;
  auto* oh = app.add_subcommand("overhead", "Closed-form training overhead table");
  oh->add_option("--Nt", oh_nt, "Transmit array size")->capture_default_str();
  oh->add_option("--Ld", oh_ld, "Paths to detect")->capture_default_str();
  oh->add_option("--S0", oh_s0, "Start layer")->capture_default_str();
  oh->add_option("--K", oh_k, "ACS resolution factor")->capture_default_str();

  int pat_n = 16, pat_s0 = 0, pat_layer = 0, pat_pos = 1, pat_grid = 1024;
  std::vector<int> pat_remove;
  std::string pat_state, pat_out = "-";
  auto* pat = app.add_subcommand("pattern", "Beam pattern of one codeword of a codebook state");
  pat->add_option("--N", pat_n, "Array size")->capture_default_str();
  pat->add_option("--S0", pat_s0, "Start layer of the codebook")->capture_default_str();
  pat->add_option("--layer", pat_layer, "Codeword layer")->capture_default_str();
  pat->add_option("--pos", pat_pos, "Codeword position (1-based)")->capture_default_str();
  pat->add_option("--remove", pat_remove, "Bottom indices removed from the codebook")
      ->delimiter(',');
  pat->add_option("--state", pat_state, "Codebook descriptor 'N S0 removed=<list>'");
  pat->add_option("--grid", pat_grid, "Number of samples over [-1, 1]")->capture_default_str();
  pat->add_option("-o,--out", pat_out, "Output path, '-' for stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig cfg = load_config(run_flags);
      const auto curve = run_monte_carlo(cfg, run_flags.threads);
      with_output(run_flags.out_path, out, [&](std::ostream& os) { write_csv(os, curve); });
      if (!run_flags.trace_path.empty()) dump_traces(cfg, run_flags.trace_path, out);
    } else if (sweep->parsed()) {
      ExperimentConfig cfg = load_config(sweep_flags);
      std::vector<CurvePoint> all;
      for (const auto& name : sweep_flags.methods) {
        try {
          cfg.method = parse_method(name);
        } catch (const InvalidArgument& e) {
          return report(err, ExitCode::usage, e.what());
        }
        const auto curve = run_monte_carlo(cfg, sweep_flags.threads);
        all.insert(all.end(), curve.begin(), curve.end());
      }
      with_output(sweep_flags.out_path, out, [&](std::ostream& os) { write_csv(os, all); });
    } else if (oh->parsed()) {
      out << "method overhead\n";
      for (auto m : {OverheadMethod::dynamic, OverheadMethod::hs, OverheadMethod::mdr,
                     OverheadMethod::acs}) {
        out << to_string(m) << ' ' << overhead(m, oh_nt, oh_ld, oh_s0, oh_k) << '\n';
      }
    } else if (pat->parsed()) {
      CodebookState state = pat_state.empty() ? CodebookState(pat_n, pat_s0)
                                              : CodebookState::from_descriptor(pat_state);
      for (int p : pat_remove) state.remove_index(p);
      const Codeword& cw = state.codeword_at(pat_layer, pat_pos);
      const auto points = pattern_samples(cw.weights, pat_grid);
      const std::string header =
          fmt::format("codebook {}\ncodeword layer {} pos {} set_size {}", state.descriptor(),
                      pat_layer, pat_pos, cw.source.size());
      with_output(pat_out, out, [&](std::ostream& os) { write_pattern(os, points, header); });
    }
  } catch (const IoError& e) {
    return report(err, ExitCode::io, e.what());
  } catch (const ParseError& e) {
    return report(err, ExitCode::config, e.what());
  } catch (const ConstraintViolation& e) {
    return report(err, ExitCode::config, e.what());
  } catch (const InvalidArgument& e) {
    return report(err, ExitCode::usage, e.what());
  } catch (const IndexOutOfRange& e) {
    return report(err, ExitCode::usage, e.what());
  } catch (const std::exception& e) {
    return report(err, ExitCode::runtime, e.what());
  }
  return static_cast<int>(ExitCode::ok);
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace beamtrain
