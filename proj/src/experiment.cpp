#include "beamtrain/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "beamtrain/codebook.hpp"
#include "beamtrain/errors.hpp"

namespace beamtrain {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::dynamic: return "dynamic";
    case Method::baseline_subtraction: return "baseline_subtraction";
    case Method::exhaustive: return "exhaustive";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::dynamic, Method::baseline_subtraction, Method::exhaustive}) {
    if (text == to_string(m)) return m;
  }
  throw InvalidArgument(fmt::format(
      "unknown method '{}' (expected dynamic, baseline_subtraction or exhaustive)", text));
}

std::string_view to_string(AngleMode m) noexcept {
  return m == AngleMode::continuous ? "continuous" : "on_grid";
}

AngleMode parse_angle_mode(std::string_view text) {
  if (text == "continuous") return AngleMode::continuous;
  if (text == "on_grid") return AngleMode::on_grid;
  throw InvalidArgument(
      fmt::format("unknown angle_mode '{}' (expected continuous or on_grid)", text));
}

std::string_view to_string(OverheadMethod m) noexcept {
  switch (m) {
    case OverheadMethod::dynamic: return "dynamic";
    case OverheadMethod::hs: return "hs";
    case OverheadMethod::mdr: return "mdr";
    case OverheadMethod::acs: return "acs";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw InvalidArgument(fmt::format("bad value '{}' for {}", text, key));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw InvalidArgument(fmt::format("non-finite value for {}", key));
  }
  return value;
}

void assign(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "Nt") cfg.nt = parse_number<int>(value, key);
  else if (key == "Nr") cfg.nr = parse_number<int>(value, key);
  else if (key == "L") cfg.num_paths = parse_number<int>(value, key);
  else if (key == "L_d") cfg.paths_to_detect = parse_number<int>(value, key);
  else if (key == "S0") cfg.start_layer = parse_number<int>(value, key);
  else if (key == "P") cfg.power = parse_number<double>(value, key);
  else if (key == "snr_db_list") cfg.snr_db_list = parse_snr_list(value);
  else if (key == "trials") cfg.trials = parse_number<int>(value, key);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, key);
  else if (key == "method") cfg.method = parse_method(trim(value));
  else if (key == "angle_mode") cfg.angle_mode = parse_angle_mode(trim(value));
  else throw InvalidArgument(fmt::format("unknown key '{}'", key));
}

}  // namespace

std::vector<double> parse_snr_list(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw InvalidArgument("empty snr_db_list");
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
      throw InvalidArgument(fmt::format("snr range '{}' must be start:step:stop", text));
    }
    const double start = parse_number<double>(text.substr(0, c1), "snr start");
    const double step = parse_number<double>(text.substr(c1 + 1, c2 - c1 - 1), "snr step");
    const double stop = parse_number<double>(text.substr(c2 + 1), "snr stop");
    if (!(step > 0.0) || stop < start) {
      throw InvalidArgument(fmt::format("snr range '{}' needs step > 0 and stop >= start", text));
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<double>(text.substr(0, comma), "snr_db_list"));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, std::string_view what) {
    if (!ok) throw ConstraintViolation(fmt::format("constraint violated: {}", what));
  };
  require(is_power_of_two(cfg.nt), "Nt is a power of two");
  require(is_power_of_two(cfg.nr), "Nr is a power of two");
  require(cfg.num_paths >= 1, "L >= 1");
  require(cfg.paths_to_detect >= 1, "L_d >= 1");
  require(cfg.paths_to_detect <= cfg.num_paths, "L_d <= L");
  require(cfg.start_layer >= 0, "S0 >= 0");
  require(cfg.start_layer <= log2_exact(std::min(cfg.nt, cfg.nr)), "S0 <= log2 N");
  require(cfg.trials >= 1, "trials >= 1");
  require(cfg.power > 0.0, "P > 0");
  require(!cfg.snr_db_list.empty(), "snr_db_list is non-empty");
  if (cfg.angle_mode == AngleMode::on_grid) {
    require(cfg.num_paths <= std::min(cfg.nt, cfg.nr), "on_grid needs L <= min(Nt, Nr)");
  }
}

ExperimentConfig parse_config(std::string_view text,
                              const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    ++line_no;
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (auto it = seen.find(key); it != seen.end()) {
      throw ParseError(line_no, fmt::format("duplicate key '{}' (first on line {})", key, it->second));
    }
    seen.emplace(std::string(key), line_no);
    try {
      assign(cfg, key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  for (const auto& [key, value] : overrides) {
    try {
      assign(cfg, key, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(0, fmt::format("override {}: {}", key, e.what()));
    }
  }
  validate(cfg);
  return cfg;
}

std::string format_config(const ExperimentConfig& cfg) {
  std::string snr;
  for (std::size_t k = 0; k < cfg.snr_db_list.size(); ++k) {
    if (k) snr += ',';
    snr += fmt::format("{}", cfg.snr_db_list[k]);
  }
  return fmt::format(
      "Nt = {}\nNr = {}\nL = {}\nL_d = {}\nS0 = {}\nP = {}\nsnr_db_list = {}\ntrials = {}\n"
      "seed = {}\nmethod = {}\nangle_mode = {}\n",
      cfg.nt, cfg.nr, cfg.num_paths, cfg.paths_to_detect, cfg.start_layer, cfg.power, snr,
      cfg.trials, cfg.seed, to_string(cfg.method), to_string(cfg.angle_mode));
}

// ---------------------------------------------------------------------------
// Metrics

int true_bin(double omega, int n) {
  check_cosine(omega);
  if (n < 1) throw InvalidArgument(fmt::format("array size {} < 1", n));
  auto upper = [n](int i) { return -1.0 + 2.0 * i / n; };
  int i = static_cast<int>(std::ceil((omega + 1.0) * n / 2.0));
  i = std::clamp(i, 1, n);
  while (i > 1 && omega <= upper(i - 1)) --i;
  while (i < n && omega > upper(i)) ++i;
  return i;
}

bool success_detection(std::span<const DetectedPair> detected, const ChannelRealization& ch) {
  if (detected.empty()) return false;
  std::vector<DetectedPair> truth;
  truth.reserve(ch.paths().size());
  for (const auto& path : ch.paths()) {
    truth.push_back({true_bin(path.aod, ch.nt()), true_bin(path.aoa, ch.nr())});
  }
  // Matching is on equality, so greedy assignment is maximal.
  std::vector<bool> used(truth.size(), false);
  for (const auto& d : detected) {
    bool matched = false;
    for (std::size_t l = 0; l < truth.size(); ++l) {
      if (!used[l] && truth[l] == d) {
        used[l] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

bool success_detection(const TrainingOutcome& outcome, const ChannelRealization& ch) {
  return success_detection(outcome.detected, ch);
}

bool has_coinciding_paths(const ChannelRealization& ch) {
  std::vector<DetectedPair> bins;
  for (const auto& path : ch.paths()) {
    bins.push_back({true_bin(path.aod, ch.nt()), true_bin(path.aoa, ch.nr())});
  }
  std::sort(bins.begin(), bins.end());
  return std::adjacent_find(bins.begin(), bins.end()) != bins.end();
}

double wilson_halfwidth(int successes, int trials, double z) {
  if (trials < 1) throw InvalidArgument("Wilson interval needs trials >= 1");
  const double n = trials;
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

// ---------------------------------------------------------------------------
// Overheads

std::int64_t overhead(OverheadMethod method, int nt, int paths_to_detect, int start_layer, int k) {
  if (!is_power_of_two(nt)) {
    throw InvalidArgument(fmt::format("Nt must be a power of two, got {}", nt));
  }
  const std::int64_t depth = log2_exact(nt);
  if (paths_to_detect < 1) throw InvalidArgument("L_d must be >= 1");
  const std::int64_t ld = paths_to_detect;
  if (method == OverheadMethod::acs) {
    if (k < 2) throw InvalidArgument(fmt::format("ACS needs K >= 2, got {}", k));
    return std::int64_t{k} * k * ld * ld * ld * depth;
  }
  if (start_layer < 0 || start_layer > depth) {
    throw InvalidArgument(fmt::format("S0 = {} outside [0, {}]", start_layer, depth));
  }
  const std::int64_t per_path = (std::int64_t{1} << (2 * start_layer)) + 4 * depth - 4 * start_layer;
  return method == OverheadMethod::mdr ? ld * (per_path + 9) : ld * per_path;
}

std::int64_t expected_measurements(const ExperimentConfig& cfg, Method method) {
  if (method == Method::exhaustive) return std::int64_t{cfg.nt} * cfg.nr;
  const std::int64_t shallow = log2_exact(std::min(cfg.nt, cfg.nr));
  const std::int64_t deep = log2_exact(std::max(cfg.nt, cfg.nr));
  const std::int64_t per_path =
      (std::int64_t{1} << (2 * cfg.start_layer)) + 4 * (shallow - cfg.start_layer) + 2 * (deep - shallow);
  return per_path * cfg.paths_to_detect;
}

// ---------------------------------------------------------------------------
// Monte Carlo

Rng trial_rng(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(snr_index), static_cast<std::uint32_t>(trial_index)};
  return Rng(seq);
}

TrialResult run_trial(const ExperimentConfig& cfg, Method method, double noise_variance, Rng rng) {
  const ChannelRealization ch =
      draw_channel(cfg.nt, cfg.nr, cfg.num_paths, cfg.angle_mode, rng);
  MeasurementModel mm(cfg.power, noise_variance, std::move(rng));
  TrialResult result;
  result.degenerate = has_coinciding_paths(ch);
  try {
    TrainingOutcome outcome;
    switch (method) {
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
    result.measurements = outcome.total_measurements;
    result.success = !result.degenerate && success_detection(outcome, ch);
  } catch (const DegenerateCodebook&) {
    result.degenerate = true;
    result.success = false;
    result.measurements = static_cast<int>(mm.count());
  }
  return result;
}

std::vector<CurvePoint> run_monte_carlo(const ExperimentConfig& cfg, int threads) {
  validate(cfg);
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, cfg.trials);

  std::vector<CurvePoint> curve;
  std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
  for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
    const double snr_db = cfg.snr_db_list[si];
    const double noise = snr_to_noise(snr_db, cfg.power);
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < cfg.trials; t = next++) {
        results[t] = run_trial(cfg, cfg.method, noise, trial_rng(cfg.seed, si, t));
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    }

    CurvePoint point{cfg.method, snr_db, cfg.trials, 0, 0.0, 0.0, 0.0, 0,
                     results.front().measurements, results.front().measurements};
    std::int64_t total = 0;
    for (const auto& r : results) {
      point.successes += r.success ? 1 : 0;
      point.degenerate_trials += r.degenerate ? 1 : 0;
      total += r.measurements;
      point.min_measurements = std::min<std::int64_t>(point.min_measurements, r.measurements);
      point.max_measurements = std::max<std::int64_t>(point.max_measurements, r.measurements);
    }
    point.success_rate = static_cast<double>(point.successes) / cfg.trials;
    point.wilson_halfwidth = wilson_halfwidth(point.successes, cfg.trials);
    point.mean_measurements = static_cast<double>(total) / cfg.trials;
    curve.push_back(point);
  }
  return curve;
}

void write_csv(std::ostream& out, std::span<const CurvePoint> points, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.3f},{}\n", to_string(p.method), p.snr_db,
                       p.trials, p.successes, p.success_rate, p.wilson_halfwidth,
                       p.mean_measurements, p.degenerate_trials);
  }
}

}  // namespace beamtrain
