#pragma once

// Hierarchical beam search for one path, the multi-path loop that nulls each
// detected path out of the codebooks, a subtraction-based static-codebook
// baseline, and an exhaustive bottom-layer sweep used as an oracle.

#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "beamtrain/array.hpp"
#include "beamtrain/channel.hpp"
#include "beamtrain/codebook.hpp"

namespace beamtrain {

struct TraceEntry {
  int path;  // 1-based path round
  int layer;
  int tx_pos;
  int rx_pos;
  double magnitude;
};

struct SearchTrace {
  std::vector<TraceEntry> entries;
  int measurements_used = 0;
};

struct DetectedPair {
  int p;  // transmit bottom index
  int q;  // receive bottom index
  friend bool operator==(const DetectedPair&, const DetectedPair&) = default;
  friend auto operator<=>(const DetectedPair&, const DetectedPair&) = default;
};

struct PathDetection {
  DetectedPair pair;
  cplx best_measurement;  // winning bottom-layer value
  SearchTrace trace;
};

struct TrainingOutcome {
  std::vector<DetectedPair> detected;
  std::set<int> tx_indices;  // T
  std::set<int> rx_indices;  // R
  int total_measurements = 0;
  std::vector<SearchTrace> traces;
};

/// Joint Tx/Rx descent. Measures every pair on the start layer, then the 2x2
/// children of the current winner on each deeper layer, keeping the largest
/// |y|. Uses 4^S0 + 4(log2 N - S0) measurements when Nt = Nr. With unequal
/// arrays the shallower side stops at its bottom and the deeper side continues
/// alone with 2 measurements per layer.
///
/// Pairs involving a zero codeword are still measured but never selected.
/// Ties go to the lexicographically smallest (tx, rx) position.
/// Throws DegenerateCodebook if every candidate on some layer is zero.
PathDetection descend_one_path(CodebookState& tx, CodebookState& rx,
                               const ChannelRealization& ch, MeasurementModel& mm,
                               int path_round = 1);

/// Multi-path training on caller-provided codebook states. After each path is
/// found its p is removed from `tx` and its q from `rx`.
TrainingOutcome train_dynamic(CodebookState& tx, CodebookState& rx, int paths_to_detect,
                              const ChannelRealization& ch, MeasurementModel& mm);

TrainingOutcome train_dynamic(int nt, int nr, int paths_to_detect, int start_layer,
                              const ChannelRealization& ch, MeasurementModel& mm);

/// A detected path reconstructed at its bin centers, with its effective gain.
struct EstimatedPath {
  EstimatedPath(cplx gain, int p, int q, int nt, int nr);

  cplx gain;  // includes sqrt(Nt Nr / L)
  int p;
  int q;
  ComplexVector tx_response;  // alpha(Nt, center of p)
  ComplexVector rx_response;  // alpha(Nr, center of q)
};

/// ghat = y_best / sqrt(P).
cplx estimate_gain(cplx y_best, double power);

/// sum_l sqrt(P) ghat_l (w^H alpha_r,l) (alpha_t,l^H v): the part of a
/// measurement attributed to already-estimated paths.
cplx estimated_contribution(std::span<const cplx> v, std::span<const cplx> w,
                            std::span<const EstimatedPath> estimates, double power);

/// Static codebooks; every measurement for a later path is corrected by
/// subtracting estimated_contribution() of the paths found so far.
TrainingOutcome train_baseline_subtraction(int nt, int nr, int paths_to_detect, int start_layer,
                                           const ChannelRealization& ch, MeasurementModel& mm);

/// Measures all Nt x Nr bottom beam pairs and returns the largest |y|.
DetectedPair exhaustive_sweep(const ChannelRealization& ch, MeasurementModel& mm);

/// One full bottom-layer sweep; the `paths_to_detect` largest |y| pairs are reported.
TrainingOutcome train_exhaustive(int paths_to_detect, const ChannelRealization& ch,
                                 MeasurementModel& mm);

/// One `path layer mt mr |y|` line per measurement.
void write_trace(std::ostream& out, const TrainingOutcome& outcome);

}  // namespace beamtrain
