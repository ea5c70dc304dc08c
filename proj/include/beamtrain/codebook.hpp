#pragma once

// Generalized hierarchical codebooks.
//
// Every codeword is a phase-aligned sum of bottom-layer steering vectors
// f_i = alpha(N, -1 + (2i-1)/N) over an index set, normalized to unit norm.
// A CodebookState holds the per-(layer, position) index sets for one side of
// the link and removes detected bottom indices from them, which places an
// exact null at the removed beam centers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamtrain/array.hpp"

namespace beamtrain {

/// Sorted set of bottom-layer indices in [1, N].
class IndexSet {
 public:
  explicit IndexSet(int array_size);
  IndexSet(int array_size, std::vector<int> members);

  int array_size() const noexcept { return n_; }
  const std::vector<int>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(int i) const;

  /// Returns true if `i` was present.
  bool erase(int i);

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  int n_;
  std::vector<int> members_;
};

struct Codeword {
  ComplexVector weights;
  IndexSet source;

  /// Codewords synthesized from an empty set are identically zero.
  bool is_zero() const noexcept { return source.empty(); }
};

bool is_power_of_two(int n) noexcept;
int log2_exact(int n);

/// Center direction -1 + (2i-1)/N of bottom beam i.
double bottom_center(int n, int i);

/// f_i: the steering vector toward bottom_center(n, i). Covers [-1 + 2(i-1)/N, -1 + 2i/N].
Codeword bottom_codeword(int n, int i);

/// Indices backing codeword m (1-based) of layer s: {(m-1)N/2^s + 1, ..., mN/2^s}.
IndexSet initial_index_set(int s, int m, int n);

/// Phase theta_i = pi (-1 + 1/N) i applied to f_i during synthesis.
double synthesis_phase(int n, int i);

/// sum_{i in set} e^{j theta_i} f_i, before normalization. Zero for an empty set.
ComplexVector synthesize_unnormalized(const IndexSet& set);

/// Unit-norm codeword for `set`; zero weights for an empty set.
Codeword synthesize(const IndexSet& set);

/// theta_{i+1} - theta_i under the synthesis phase schedule.
double midpoint_phase_check(int n, int i);

/// |e^{j theta_i} G(f_i, mid) - e^{j theta_{i+1}} G(f_{i+1}, mid)| at mid = -1 + 2i/N.
double midpoint_alignment_residual(int n, int i);

/// Mutable hierarchy of index sets for layers start_layer..log2(N).
///
/// Codewords are synthesized lazily by codeword_at() and cached per slot;
/// remove_index() only invalidates the slots whose set actually changed.
class CodebookState {
 public:
  CodebookState(int n, int start_layer);

  int array_size() const noexcept { return n_; }
  int num_layers() const noexcept { return depth_; }
  int start_layer() const noexcept { return start_layer_; }

  const IndexSet& index_set(int s, int m) const;
  const std::vector<int>& removed() const noexcept { return removed_; }
  bool is_removed(int p) const;

  /// Deletes bottom index p from every set. Returns false (and changes nothing)
  /// if p was already removed.
  bool remove_index(int p);

  /// Cached codeword for slot (s, m).
  const Codeword& codeword_at(int s, int m);

  /// Uncached synthesis. Safe to call concurrently on a state nobody mutates.
  Codeword synthesize_at(int s, int m) const;

  /// Number of slots whose codeword would be (re)synthesized on next request.
  std::size_t dirty_slots() const noexcept;

  /// `N S0 removed=<comma list>`.
  std::string descriptor() const;
  static CodebookState from_descriptor(std::string_view text);

 private:
  struct Slot {
    IndexSet set;
    std::optional<Codeword> cached;
  };

  const Slot& slot(int s, int m) const;
  Slot& slot(int s, int m);

  int n_;
  int depth_;
  int start_layer_;
  std::vector<std::vector<Slot>> layers_;
  std::vector<int> removed_;
};

inline CodebookState make_codebook_state(int n, int start_layer) {
  return CodebookState(n, start_layer);
}

}  // namespace beamtrain
