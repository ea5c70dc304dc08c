#include "beamtrain/codebook.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "beamtrain/errors.hpp"

namespace beamtrain {

namespace {

void check_bottom_index(int n, int i) {
  if (i < 1 || i > n) {
    throw IndexOutOfRange(fmt::format("bottom index {} outside [1, {}]", i, n));
  }
}

void check_array_size(int n) {
  if (!is_power_of_two(n)) {
    throw InvalidArgument(fmt::format("array size must be a power of two, got {}", n));
  }
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw InvalidArgument(fmt::format("bad {} '{}' in codebook descriptor", what, text));
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// IndexSet

IndexSet::IndexSet(int array_size) : n_(array_size) {
  if (array_size < 1) throw InvalidArgument("index set over an empty array");
}

IndexSet::IndexSet(int array_size, std::vector<int> members)
    : n_(array_size), members_(std::move(members)) {
  if (array_size < 1) throw InvalidArgument("index set over an empty array");
  for (int i : members_) check_bottom_index(n_, i);
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool IndexSet::contains(int i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

bool IndexSet::erase(int i) {
  auto it = std::lower_bound(members_.begin(), members_.end(), i);
  if (it == members_.end() || *it != i) return false;
  members_.erase(it);
  return true;
}

// ---------------------------------------------------------------------------
// Synthesis

bool is_power_of_two(int n) noexcept {
  return n > 0 && std::has_single_bit(static_cast<unsigned>(n));
}

int log2_exact(int n) {
  check_array_size(n);
  return std::countr_zero(static_cast<unsigned>(n));
}

double bottom_center(int n, int i) {
  check_bottom_index(n, i);
  return -1.0 + static_cast<double>(2 * i - 1) / n;
}

Codeword bottom_codeword(int n, int i) {
  check_bottom_index(n, i);
  return {steering_vector(n, bottom_center(n, i)), IndexSet(n, {i})};
}

IndexSet initial_index_set(int s, int m, int n) {
  const int depth = log2_exact(n);
  if (s < 0 || s > depth) {
    throw IndexOutOfRange(fmt::format("layer {} outside [0, {}]", s, depth));
  }
  const int width = 1 << s;
  if (m < 1 || m > width) {
    throw IndexOutOfRange(fmt::format("position {} outside [1, {}] on layer {}", m, width, s));
  }
  const int span = n / width;
  std::vector<int> members(static_cast<std::size_t>(span));
  for (int k = 0; k < span; ++k) members[k] = (m - 1) * span + 1 + k;
  return IndexSet(n, std::move(members));
}

double synthesis_phase(int n, int i) {
  return kPi * (-1.0 + 1.0 / n) * i;
}

ComplexVector synthesize_unnormalized(const IndexSet& set) {
  const int n = set.array_size();
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector v(static_cast<std::size_t>(n), cplx{0.0, 0.0});
  for (int i : set) {
    const double theta = synthesis_phase(n, i);
    const double center = -1.0 + static_cast<double>(2 * i - 1) / n;
    for (int k = 0; k < n; ++k) v[k] += std::polar(amp, theta + kPi * k * center);
  }
  return v;
}

Codeword synthesize(const IndexSet& set) {
  ComplexVector v = synthesize_unnormalized(set);
  if (!set.empty()) {
    const double scale = 1.0 / norm(v);
    for (auto& x : v) x *= scale;
  }
  return {std::move(v), set};
}

double midpoint_phase_check(int n, int i) {
  check_array_size(n);
  if (i < 1 || i >= n) {
    throw IndexOutOfRange(fmt::format("adjacent pair ({}, {}) outside [1, {}]", i, i + 1, n));
  }
  return synthesis_phase(n, i + 1) - synthesis_phase(n, i);
}

double midpoint_alignment_residual(int n, int i) {
  midpoint_phase_check(n, i);
  const double mid = -1.0 + 2.0 * i / n;
  const cplx left = std::polar(1.0, synthesis_phase(n, i)) *
                    beam_gain(bottom_codeword(n, i).weights, mid);
  const cplx right = std::polar(1.0, synthesis_phase(n, i + 1)) *
                     beam_gain(bottom_codeword(n, i + 1).weights, mid);
  return std::abs(left - right);
}

// ---------------------------------------------------------------------------
// CodebookState

CodebookState::CodebookState(int n, int start_layer)
    : n_(n), depth_(log2_exact(n)), start_layer_(start_layer) {
  if (start_layer < 0 || start_layer > depth_) {
    throw InvalidArgument(
        fmt::format("start layer {} outside [0, log2 N = {}]", start_layer, depth_));
  }
  layers_.reserve(static_cast<std::size_t>(depth_ - start_layer_ + 1));
  for (int s = start_layer_; s <= depth_; ++s) {
    std::vector<Slot> row;
    row.reserve(std::size_t{1} << s);
    for (int m = 1; m <= (1 << s); ++m) row.push_back({initial_index_set(s, m, n_), {}});
    layers_.push_back(std::move(row));
  }
}

const CodebookState::Slot& CodebookState::slot(int s, int m) const {
  if (s < start_layer_ || s > depth_) {
    throw IndexOutOfRange(
        fmt::format("layer {} outside [{}, {}]", s, start_layer_, depth_));
  }
  if (m < 1 || m > (1 << s)) {
    throw IndexOutOfRange(fmt::format("position {} outside [1, {}] on layer {}", m, 1 << s, s));
  }
  return layers_[s - start_layer_][m - 1];
}

CodebookState::Slot& CodebookState::slot(int s, int m) {
  return const_cast<Slot&>(std::as_const(*this).slot(s, m));
}

const IndexSet& CodebookState::index_set(int s, int m) const { return slot(s, m).set; }

bool CodebookState::is_removed(int p) const {
  return std::binary_search(removed_.begin(), removed_.end(), p);
}

bool CodebookState::remove_index(int p) {
  check_bottom_index(n_, p);
  auto pos = std::lower_bound(removed_.begin(), removed_.end(), p);
  if (pos != removed_.end() && *pos == p) return false;
  removed_.insert(pos, p);
  // Exactly one slot per layer covers p.
  for (int s = start_layer_; s <= depth_; ++s) {
    const int m = (p - 1) / (n_ >> s) + 1;
    Slot& target = slot(s, m);
    target.set.erase(p);
    target.cached.reset();
  }
  return true;
}

const Codeword& CodebookState::codeword_at(int s, int m) {
  Slot& target = slot(s, m);
  if (!target.cached) target.cached = synthesize(target.set);
  return *target.cached;
}

Codeword CodebookState::synthesize_at(int s, int m) const { return synthesize(slot(s, m).set); }

std::size_t CodebookState::dirty_slots() const noexcept {
  std::size_t count = 0;
  for (const auto& row : layers_) {
    for (const auto& sl : row) count += sl.cached ? 0 : 1;
  }
  return count;
}

std::string CodebookState::descriptor() const {
  std::string out = fmt::format("{} {} removed=", n_, start_layer_);
  for (std::size_t k = 0; k < removed_.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(removed_[k]);
  }
  return out;
}

CodebookState CodebookState::from_descriptor(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string n_tok, s0_tok, removed_tok, extra;
  if (!(in >> n_tok >> s0_tok)) {
    throw InvalidArgument(fmt::format("codebook descriptor '{}' needs 'N S0'", text));
  }
  in >> removed_tok;
  if (in >> extra) {
    throw InvalidArgument(fmt::format("trailing token '{}' in codebook descriptor", extra));
  }
  CodebookState state(parse_int(n_tok, "N"), parse_int(s0_tok, "S0"));
  if (removed_tok.empty()) return state;
  constexpr std::string_view kKey = "removed=";
  if (!removed_tok.starts_with(kKey)) {
    throw InvalidArgument(fmt::format("expected 'removed=' in codebook descriptor, got '{}'",
                                      removed_tok));
  }
  std::string_view list = std::string_view(removed_tok).substr(kKey.size());
  while (!list.empty()) {
    const auto comma = list.find(',');
    state.remove_index(parse_int(list.substr(0, comma), "removed index"));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return state;
}

}  // namespace beamtrain
