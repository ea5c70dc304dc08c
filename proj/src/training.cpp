#include "beamtrain/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "beamtrain/errors.hpp"

namespace beamtrain {

namespace {

struct Node {
  int layer;
  int pos;
};

struct Candidate {
  Node tx;
  Node rx;
};

// Children of `node` one layer down, or the node itself once it sits on the bottom.
void expand(const Node& node, int depth, std::vector<Node>& out) {
  out.clear();
  if (node.layer < depth) {
    out.push_back({node.layer + 1, 2 * node.pos - 1});
    out.push_back({node.layer + 1, 2 * node.pos});
  } else {
    out.push_back(node);
  }
}

template <typename MeasureFn>
PathDetection descend(CodebookState& tx, CodebookState& rx, int path_round, MeasureFn&& measure) {
  if (tx.start_layer() != rx.start_layer()) {
    throw InvalidArgument(fmt::format("transmit start layer {} differs from receive start layer {}",
                                      tx.start_layer(), rx.start_layer()));
  }
  const int start = tx.start_layer();
  PathDetection result{{0, 0}, {}, {}};
  std::vector<Candidate> candidates;

  // Measures every candidate and returns the winner; zero codewords are consumed but lose.
  auto pick = [&](int trace_layer) -> std::pair<Candidate, cplx> {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = candidates.size();
    cplx best_y{};
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const auto& c = candidates[k];
      const Codeword& v = tx.codeword_at(c.tx.layer, c.tx.pos);
      const Codeword& w = rx.codeword_at(c.rx.layer, c.rx.pos);
      const cplx y = measure(v.weights, w.weights);
      ++result.trace.measurements_used;
      const double mag = std::abs(y);
      result.trace.entries.push_back({path_round, trace_layer, c.tx.pos, c.rx.pos, mag});
      if (v.is_zero() || w.is_zero()) continue;
      if (mag > best) {
        best = mag;
        best_idx = k;
        best_y = y;
      }
    }
    if (best_idx == candidates.size()) {
      throw DegenerateCodebook(fmt::format(
          "path {}: every candidate codeword pair on layer {} is zero", path_round, trace_layer));
    }
    return {candidates[best_idx], best_y};
  };

  const int width = 1 << start;
  for (int mt = 1; mt <= width; ++mt) {
    for (int mr = 1; mr <= width; ++mr) candidates.push_back({{start, mt}, {start, mr}});
  }
  auto [current, y] = pick(start);

  const int deepest = std::max(tx.num_layers(), rx.num_layers());
  std::vector<Node> tx_children, rx_children;
  for (int s = start; s < deepest; ++s) {
    expand(current.tx, tx.num_layers(), tx_children);
    expand(current.rx, rx.num_layers(), rx_children);
    candidates.clear();
    for (const auto& t : tx_children) {
      for (const auto& r : rx_children) candidates.push_back({t, r});
    }
    std::tie(current, y) = pick(s + 1);
  }

  result.pair = {current.tx.pos, current.rx.pos};
  result.best_measurement = y;
  return result;
}

void record(TrainingOutcome& outcome, PathDetection&& detection) {
  outcome.detected.push_back(detection.pair);
  outcome.tx_indices.insert(detection.pair.p);
  outcome.rx_indices.insert(detection.pair.q);
  outcome.total_measurements += detection.trace.measurements_used;
  outcome.traces.push_back(std::move(detection.trace));
}

void check_path_count(int paths_to_detect) {
  if (paths_to_detect < 1) {
    throw InvalidArgument(fmt::format("paths to detect must be >= 1, got {}", paths_to_detect));
  }
}

void check_dimensions(const CodebookState& tx, const CodebookState& rx,
                      const ChannelRealization& ch) {
  if (tx.array_size() != ch.nt() || rx.array_size() != ch.nr()) {
    throw DimensionMismatch(fmt::format("codebooks are {}x{} but the channel is {}x{}",
                                        tx.array_size(), rx.array_size(), ch.nt(), ch.nr()));
  }
}

}  // namespace

PathDetection descend_one_path(CodebookState& tx, CodebookState& rx,
                               const ChannelRealization& ch, MeasurementModel& mm,
                               int path_round) {
  check_dimensions(tx, rx, ch);
  return descend(tx, rx, path_round, [&](std::span<const cplx> v, std::span<const cplx> w) {
    return mm.measure(ch, v, w);
  });
}

TrainingOutcome train_dynamic(CodebookState& tx, CodebookState& rx, int paths_to_detect,
                              const ChannelRealization& ch, MeasurementModel& mm) {
  check_path_count(paths_to_detect);
  TrainingOutcome outcome;
  for (int l = 1; l <= paths_to_detect; ++l) {
    PathDetection detection = descend_one_path(tx, rx, ch, mm, l);
    tx.remove_index(detection.pair.p);
    rx.remove_index(detection.pair.q);
    record(outcome, std::move(detection));
  }
  return outcome;
}

TrainingOutcome train_dynamic(int nt, int nr, int paths_to_detect, int start_layer,
                              const ChannelRealization& ch, MeasurementModel& mm) {
  CodebookState tx(nt, start_layer);
  CodebookState rx(nr, start_layer);
  return train_dynamic(tx, rx, paths_to_detect, ch, mm);
}

EstimatedPath::EstimatedPath(cplx gain_, int p_, int q_, int nt, int nr)
    : gain(gain_),
      p(p_),
      q(q_),
      tx_response(steering_vector(nt, bottom_center(nt, p_))),
      rx_response(steering_vector(nr, bottom_center(nr, q_))) {}

cplx estimate_gain(cplx y_best, double power) {
  if (!(power > 0.0)) throw InvalidArgument(fmt::format("power must be positive, got {}", power));
  return y_best / std::sqrt(power);
}

cplx estimated_contribution(std::span<const cplx> v, std::span<const cplx> w,
                            std::span<const EstimatedPath> estimates, double power) {
  cplx acc{0.0, 0.0};
  for (const auto& e : estimates) {
    acc += e.gain * inner_product(w, e.rx_response) * inner_product(e.tx_response, v);
  }
  return std::sqrt(power) * acc;
}

TrainingOutcome train_baseline_subtraction(int nt, int nr, int paths_to_detect, int start_layer,
                                           const ChannelRealization& ch, MeasurementModel& mm) {
  check_path_count(paths_to_detect);
  CodebookState tx(nt, start_layer);
  CodebookState rx(nr, start_layer);
  check_dimensions(tx, rx, ch);
  std::vector<EstimatedPath> estimates;
  TrainingOutcome outcome;
  for (int l = 1; l <= paths_to_detect; ++l) {
    PathDetection detection =
        descend(tx, rx, l, [&](std::span<const cplx> v, std::span<const cplx> w) {
          return mm.measure(ch, v, w) - estimated_contribution(v, w, estimates, mm.power());
        });
    const auto [p, q] = detection.pair;
    // The winning bottom codewords are phase-rotated steering vectors; strip their unit-modulus
    // response toward the detected centers so the gain is referenced to the bare steering vectors.
    EstimatedPath est({}, p, q, nt, nr);
    const cplx response =
        inner_product(rx.codeword_at(rx.num_layers(), q).weights, est.rx_response) *
        inner_product(est.tx_response, tx.codeword_at(tx.num_layers(), p).weights);
    est.gain = estimate_gain(detection.best_measurement / response, mm.power());
    estimates.push_back(std::move(est));
    record(outcome, std::move(detection));
  }
  return outcome;
}

namespace {

struct SweepResult {
  std::vector<cplx> values;  // row-major, tx outer
  SearchTrace trace;
};

SweepResult sweep_bottom(const ChannelRealization& ch, MeasurementModel& mm) {
  const int nt = ch.nt();
  const int nr = ch.nr();
  std::vector<ComplexVector> rx_beams;
  rx_beams.reserve(static_cast<std::size_t>(nr));
  for (int q = 1; q <= nr; ++q) rx_beams.push_back(bottom_codeword(nr, q).weights);
  const int layer = is_power_of_two(std::max(nt, nr)) ? log2_exact(std::max(nt, nr)) : 0;

  SweepResult out;
  out.values.reserve(static_cast<std::size_t>(nt) * nr);
  for (int p = 1; p <= nt; ++p) {
    const ComplexVector v = bottom_codeword(nt, p).weights;
    for (int q = 1; q <= nr; ++q) {
      const cplx y = mm.measure(ch, v, rx_beams[q - 1]);
      out.values.push_back(y);
      out.trace.entries.push_back({1, layer, p, q, std::abs(y)});
      ++out.trace.measurements_used;
    }
  }
  return out;
}

}  // namespace

DetectedPair exhaustive_sweep(const ChannelRealization& ch, MeasurementModel& mm) {
  const SweepResult sweep = sweep_bottom(ch, mm);
  std::size_t best = 0;
  for (std::size_t k = 1; k < sweep.values.size(); ++k) {
    if (std::abs(sweep.values[k]) > std::abs(sweep.values[best])) best = k;
  }
  return {static_cast<int>(best) / ch.nr() + 1, static_cast<int>(best) % ch.nr() + 1};
}

TrainingOutcome train_exhaustive(int paths_to_detect, const ChannelRealization& ch,
                                 MeasurementModel& mm) {
  check_path_count(paths_to_detect);
  const int total = ch.nt() * ch.nr();
  if (paths_to_detect > total) {
    throw InvalidArgument(
        fmt::format("cannot report {} pairs from a {}-pair sweep", paths_to_detect, total));
  }
  SweepResult sweep = sweep_bottom(ch, mm);
  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(sweep.values[a]) > std::abs(sweep.values[b]);
  });
  TrainingOutcome outcome;
  for (int l = 0; l < paths_to_detect; ++l) {
    const DetectedPair pair{order[l] / ch.nr() + 1, order[l] % ch.nr() + 1};
    outcome.detected.push_back(pair);
    outcome.tx_indices.insert(pair.p);
    outcome.rx_indices.insert(pair.q);
  }
  outcome.total_measurements = sweep.trace.measurements_used;
  outcome.traces.push_back(std::move(sweep.trace));
  return outcome;
}

void write_trace(std::ostream& out, const TrainingOutcome& outcome) {
  for (const auto& trace : outcome.traces) {
    for (const auto& e : trace.entries) {
      out << fmt::format("{} {} {} {} {:.12e}\n", e.path, e.layer, e.tx_pos, e.rx_pos,
                         e.magnitude);
    }
  }
}

}  // namespace beamtrain
