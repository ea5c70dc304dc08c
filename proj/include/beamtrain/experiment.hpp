#pragma once

// Monte Carlo harness: success metric, closed-form training overheads,
// `key = value` experiment configs and CSV output.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "beamtrain/channel.hpp"
#include "beamtrain/training.hpp"

namespace beamtrain {

enum class Method { dynamic, baseline_subtraction, exhaustive };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view text);

std::string_view to_string(AngleMode m) noexcept;
AngleMode parse_angle_mode(std::string_view text);

struct ExperimentConfig {
  int nt = 32;
  int nr = 32;
  int num_paths = 3;        // L
  int paths_to_detect = 3;  // L_d
  int start_layer = 2;      // S0
  double power = 1.0;
  std::vector<double> snr_db_list = {-5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};
  int trials = 1000;
  std::uint64_t seed = 1;
  Method method = Method::dynamic;
  AngleMode angle_mode = AngleMode::continuous;
};

/// Throws ConstraintViolation naming the first broken invariant.
void validate(const ExperimentConfig& cfg);

/// Parses `key = value` lines (`#` starts a comment). Entries in `overrides`
/// replace file values before validation. Unknown keys are rejected.
///
/// Keys: Nt, Nr, L, L_d, S0, P, snr_db_list, trials, seed, method, angle_mode.
/// snr_db_list is either a comma list or `start:step:stop`.
ExperimentConfig parse_config(std::string_view text,
                              const std::map<std::string, std::string>& overrides = {});

/// Renders every key; parse_config(format_config(c)) reproduces c.
std::string format_config(const ExperimentConfig& cfg);

std::vector<double> parse_snr_list(std::string_view text);

/// Bottom beam whose coverage (lo, hi] contains omega; -1 maps to beam 1.
int true_bin(double omega, int n);

/// True iff the detected pairs can be matched one-to-one onto true path bins.
/// With as many detections as paths this is multiset equality; with fewer,
/// every detection must consume a distinct true path.
bool success_detection(std::span<const DetectedPair> detected, const ChannelRealization& ch);
bool success_detection(const TrainingOutcome& outcome, const ChannelRealization& ch);

/// Two or more paths share the same (AoD bin, AoA bin).
bool has_coinciding_paths(const ChannelRealization& ch);

/// 95% Wilson score interval half-width.
double wilson_halfwidth(int successes, int trials, double z = 1.959963984540054);

struct CurvePoint {
  Method method;
  double snr_db;
  int trials;
  int successes;
  double success_rate;
  double wilson_halfwidth;
  double mean_measurements;
  int degenerate_trials;
  std::int64_t min_measurements;
  std::int64_t max_measurements;
};

struct TrialResult {
  bool success = false;
  int measurements = 0;
  bool degenerate = false;  // coinciding true paths or an all-zero codebook layer
};

/// Per-trial generator, derived from (seed, snr index, trial index) only, so
/// every method sees the same channel draw for a given trial.
Rng trial_rng(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index);

TrialResult run_trial(const ExperimentConfig& cfg, Method method, double noise_variance, Rng rng);

/// `threads` <= 0 selects hardware concurrency. Output does not depend on it.
std::vector<CurvePoint> run_monte_carlo(const ExperimentConfig& cfg, int threads = 1);

enum class OverheadMethod { dynamic, hs, mdr, acs };

std::string_view to_string(OverheadMethod m) noexcept;

/// Total number of training measurements for a full multi-path session.
std::int64_t overhead(OverheadMethod method, int nt, int paths_to_detect, int start_layer,
                      int k = 2);

/// Closed-form per-trial measurement count of a simulated method under `cfg`.
std::int64_t expected_measurements(const ExperimentConfig& cfg, Method method);

inline constexpr std::string_view kCsvHeader =
    "method,snr_db,trials,successes,success_rate,wilson_halfwidth,mean_measurements,"
    "degenerate_trials";

void write_csv(std::ostream& out, std::span<const CurvePoint> points, bool header = true);

}  // namespace beamtrain
