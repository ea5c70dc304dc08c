#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "beamtrain/errors.hpp"
#include "beamtrain/experiment.hpp"
#include "beamtrain/training.hpp"

using namespace beamtrain;

namespace {

// Single on-grid path with bins (p, q).
ChannelRealization grid_path(int nt, int nr, int p, int q, cplx gain = {1.0, 0.0}) {
  return ChannelRealization(nt, nr, {{gain, bottom_center(nt, p), bottom_center(nr, q)}});
}

int bin_of(double omega, int n) { return true_bin(omega, n); }

}  // namespace

TEST_CASE("descent uses 4^S0 + 4(log2 N - S0) measurements") {
  Rng rng(1);
  for (auto [n, start, expected] : {std::tuple{32, 2, 28}, {16, 0, 17}, {64, 3, 76}, {2, 1, 4}}) {
    const auto ch = draw_channel(n, n, 2, AngleMode::continuous, rng);
    CodebookState tx(n, start), rx(n, start);
    MeasurementModel mm(1.0, 0.3, 5);
    const auto d = descend_one_path(tx, rx, ch, mm);
    CHECK(d.trace.measurements_used == expected);
    CHECK(mm.count() == expected);
    CHECK(d.trace.entries.size() == static_cast<std::size_t>(expected));
  }
}

TEST_CASE("root-layer start measures the single root pair first") {
  const auto ch = grid_path(16, 16, 3, 9);
  CodebookState tx(16, 0), rx(16, 0);
  MeasurementModel mm(1.0, 0.0, 1);
  const auto d = descend_one_path(tx, rx, ch, mm);
  CHECK(d.trace.entries.front().layer == 0);
  CHECK(d.trace.entries.front().tx_pos == 1);
  CHECK(d.trace.entries[1].layer == 1);
  CHECK(d.pair == DetectedPair{3, 9});
}

TEST_CASE("noiseless on-grid single path: descent equals the exhaustive sweep") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ch = draw_channel(32, 32, 1, AngleMode::on_grid, rng);
    const DetectedPair truth{bin_of(ch.paths()[0].aod, 32), bin_of(ch.paths()[0].aoa, 32)};
    CodebookState tx(32, 2), rx(32, 2);
    MeasurementModel mm(1.0, 0.0, 1);
    const auto d = descend_one_path(tx, rx, ch, mm);
    MeasurementModel sweep_mm(1.0, 0.0, 1);
    const auto oracle = exhaustive_sweep(ch, sweep_mm);
    CHECK(d.pair == truth);
    CHECK(oracle == truth);
    CHECK(sweep_mm.count() == 1024);
  }
}

TEST_CASE("exhaustive sweep picks the stronger of two on-grid paths") {
  const ChannelRealization ch(32, 32, {{{1.5, 0.2}, bottom_center(32, 4), bottom_center(32, 30)},
                                       {{-0.4, 0.9}, bottom_center(32, 21), bottom_center(32, 2)}});
  MeasurementModel mm(1.0, 0.0, 1);
  CHECK(exhaustive_sweep(ch, mm) == DetectedPair{4, 30});
}

TEST_CASE("dynamic training on a single path") {
  const auto ch = grid_path(32, 32, 11, 27, {0.3, -0.9});
  MeasurementModel mm(1.0, 0.0, 3);
  const auto out = train_dynamic(32, 32, 1, 2, ch, mm);
  REQUIRE(out.detected.size() == 1);
  CHECK(out.detected[0] == DetectedPair{11, 27});
  CHECK(out.total_measurements == 28);
}

TEST_CASE("dynamic training bookkeeping") {
  Rng rng(8);
  for (double noise : {0.0, 0.1, 10.0}) {
    const auto ch = draw_channel(32, 32, 3, AngleMode::continuous, rng);
    CodebookState tx(32, 2), rx(32, 2);
    MeasurementModel mm(1.0, noise, 4);
    const auto out = train_dynamic(tx, rx, 3, ch, mm);
    CHECK(out.total_measurements == 84);
    CHECK(mm.count() == 84);
    REQUIRE(out.detected.size() == 3);
    REQUIRE(out.traces.size() == 3);
    std::set<int> t, r;
    for (const auto& d : out.detected) {
      t.insert(d.p);
      r.insert(d.q);
    }
    CHECK(out.tx_indices == t);
    CHECK(out.rx_indices == r);
    CHECK(std::vector<int>(t.begin(), t.end()) == tx.removed());
    CHECK(std::vector<int>(r.begin(), r.end()) == rx.removed());
  }
}

TEST_CASE("detected paths are nulled out of every later codeword") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = draw_channel(32, 32, 3, AngleMode::on_grid, rng);
    CodebookState tx(32, 2), rx(32, 2);
    MeasurementModel mm(1.0, 0.0, 1);
    std::vector<DetectedPair> found;
    for (int l = 1; l <= 3; ++l) {
      const auto d = descend_one_path(tx, rx, ch, mm, l);
      for (const auto& prev : found) CHECK_FALSE(prev == d.pair);
      found.push_back(d.pair);
      tx.remove_index(d.pair.p);
      rx.remove_index(d.pair.q);
      for (int s = 2; s <= 5; ++s) {
        for (int m = 1; m <= (1 << s); ++m) {
          CHECK(std::abs(beam_gain(tx.codeword_at(s, m).weights, bottom_center(32, d.pair.p))) <
                1e-10 * std::sqrt(32.0));
          CHECK(std::abs(beam_gain(rx.codeword_at(s, m).weights, bottom_center(32, d.pair.q))) <
                1e-10 * std::sqrt(32.0));
        }
      }
    }
    CHECK(success_detection(found, ch));
  }
}

TEST_CASE("baseline equals dynamic when only one path is trained") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ch = draw_channel(32, 32, 3, AngleMode::continuous, rng);
    MeasurementModel a(1.0, 0.5, 100 + trial), b(1.0, 0.5, 100 + trial);
    const auto dyn = train_dynamic(32, 32, 1, 2, ch, a);
    const auto base = train_baseline_subtraction(32, 32, 1, 2, ch, b);
    CHECK(dyn.detected == base.detected);
    REQUIRE(dyn.traces[0].entries.size() == base.traces[0].entries.size());
    for (std::size_t k = 0; k < dyn.traces[0].entries.size(); ++k) {
      CHECK(dyn.traces[0].entries[k].magnitude == base.traces[0].entries[k].magnitude);
    }
  }
}

TEST_CASE("baseline recovers two noiseless on-grid paths") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ch = draw_channel(32, 32, 2, AngleMode::on_grid, rng);
    MeasurementModel mm(1.0, 0.0, 1);
    const auto out = train_baseline_subtraction(32, 32, 2, 2, ch, mm);
    CHECK(success_detection(out, ch));
    CHECK(out.total_measurements == 56);
  }
}

TEST_CASE("on-grid subtraction leaves exactly the undetected paths") {
  Rng rng(55);
  const double power = 2.0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto ch = draw_channel(32, 32, 3, AngleMode::on_grid, rng);
    const auto& paths = ch.paths();
    // Estimate the first path the way the baseline does: one matched bottom measurement.
    const int p = true_bin(paths[0].aod, 32), q = true_bin(paths[0].aoa, 32);
    MeasurementModel mm(power, 0.0, 1);
    const cplx y = mm.measure(ch, bottom_codeword(32, p).weights, bottom_codeword(32, q).weights);
    const std::vector<EstimatedPath> est{EstimatedPath(estimate_gain(y, power), p, q, 32, 32)};
    CHECK(std::abs(est[0].gain - ch.scale() * paths[0].gain) < 1e-9);

    // Remaining paths keep their gains but the L normalisation of the full channel.
    const double rescale = std::sqrt(2.0 / 3.0);
    const ChannelRealization rest(32, 32, {{paths[1].gain * rescale, paths[1].aod, paths[1].aoa},
                                           {paths[2].gain * rescale, paths[2].aod, paths[2].aoa}});
    CodebookState tx(32, 2), rx(32, 2);
    MeasurementModel full_mm(power, 0.0, 1), rest_mm(power, 0.0, 1);
    for (int s = 2; s <= 5; ++s) {
      for (int m = 1; m <= (1 << s); m += 3) {
        for (int k = 1; k <= (1 << s); k += 5) {
          const auto& v = tx.codeword_at(s, m).weights;
          const auto& w = rx.codeword_at(s, k).weights;
          const cplx corrected = full_mm.measure(ch, v, w) - estimated_contribution(v, w, est, power);
          const cplx expected = rest_mm.measure(rest, v, w);
          CHECK(std::abs(corrected - expected) <= 1e-8 * std::max(1.0, std::abs(expected)));
        }
      }
    }
  }
}

TEST_CASE("gain estimate") {
  CHECK(std::abs(estimate_gain({32.0, 0.0}, 1.0) - cplx{32.0, 0.0}) < 1e-15);
  CHECK(estimate_gain({0.0, 0.0}, 1.0) == cplx{0.0, 0.0});
  CHECK(std::abs(estimate_gain({2.0, 0.0}, 4.0) - cplx{1.0, 0.0}) < 1e-15);
  CHECK_THROWS_AS(estimate_gain({1.0, 0.0}, 0.0), InvalidArgument);

  // Noiseless, matched, L = 1, lambda = 1.
  const auto ch = grid_path(32, 32, 5, 6);
  MeasurementModel mm(1.0, 0.0, 1);
  const cplx y = mm.measure(ch, bottom_codeword(32, 5).weights, bottom_codeword(32, 6).weights);
  CHECK(std::abs(estimate_gain(y, 1.0) - cplx{32.0, 0.0}) < 1e-11);
}

TEST_CASE("ties resolve to the smallest positions and reruns are identical") {
  const auto ch = grid_path(16, 16, 9, 9, {0.0, 0.0});
  MeasurementModel mm(1.0, 0.0, 1);
  const auto out = train_dynamic(16, 16, 2, 1, ch, mm);
  CHECK(out.detected[0] == DetectedPair{1, 1});
  CHECK(out.detected[1] == DetectedPair{2, 2});

  Rng rng(4);
  const auto noisy = draw_channel(16, 16, 3, AngleMode::continuous, rng);
  MeasurementModel a(1.0, 1.0, 9), b(1.0, 1.0, 9);
  std::ostringstream ta, tb;
  write_trace(ta, train_baseline_subtraction(16, 16, 3, 1, noisy, a));
  write_trace(tb, train_baseline_subtraction(16, 16, 3, 1, noisy, b));
  CHECK(ta.str() == tb.str());
}

TEST_CASE("all-zero layer is reported as a degenerate codebook") {
  const auto ch = grid_path(2, 2, 1, 1);
  CodebookState tx(2, 1), rx(2, 1);
  tx.remove_index(1);
  tx.remove_index(2);
  MeasurementModel mm(1.0, 0.0, 1);
  CHECK_THROWS_AS(descend_one_path(tx, rx, ch, mm), DegenerateCodebook);

  MeasurementModel mm2(1.0, 0.0, 1);
  CHECK_THROWS_AS(train_dynamic(2, 2, 3, 1, ch, mm2), DegenerateCodebook);
}

TEST_CASE("unequal arrays continue the deeper side alone") {
  Rng rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = draw_channel(16, 4, 1, AngleMode::on_grid, rng);
    MeasurementModel mm(1.0, 0.0, 1);
    const auto out = train_dynamic(16, 4, 1, 1, ch, mm);
    // 4 + 4 (4 -> layer 2 on both) + 2 * 2 (tx only down to layer 4).
    CHECK(out.total_measurements == 12);
    CHECK(success_detection(out, ch));
  }
  ExperimentConfig cfg;
  cfg.nt = 16;
  cfg.nr = 4;
  cfg.start_layer = 1;
  cfg.paths_to_detect = 1;
  CHECK(expected_measurements(cfg, Method::dynamic) == 12);
}

TEST_CASE("codebook and channel sizes must agree") {
  const auto ch = grid_path(16, 16, 1, 1);
  CodebookState tx(32, 1), rx(16, 1);
  MeasurementModel mm(1.0, 0.0, 1);
  CHECK_THROWS_AS(descend_one_path(tx, rx, ch, mm), DimensionMismatch);
  CodebookState tx2(16, 1), rx2(16, 2);
  CHECK_THROWS_AS(descend_one_path(tx2, rx2, ch, mm), InvalidArgument);
}

TEST_CASE("trace dump has one line per measurement") {
  Rng rng(2);
  const auto ch = draw_channel(32, 32, 3, AngleMode::continuous, rng);
  MeasurementModel mm(1.0, 0.1, 2);
  const auto out = train_dynamic(32, 32, 3, 2, ch, mm);
  std::ostringstream os;
  write_trace(os, out);
  std::istringstream in(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    int path = 0, layer = 0, mt = 0, mr = 0;
    double mag = -1;
    REQUIRE(static_cast<bool>(row >> path >> layer >> mt >> mr >> mag));
    CHECK(path >= 1);
    CHECK(path <= 3);
    CHECK(mag >= 0.0);
    ++lines;
  }
  CHECK(lines == 84);
}

TEST_CASE("exhaustive multi-path training reports the largest distinct pairs") {
  const ChannelRealization ch(8, 8, {{{2.0, 0.0}, bottom_center(8, 2), bottom_center(8, 7)},
                                     {{1.0, 0.0}, bottom_center(8, 5), bottom_center(8, 1)}});
  MeasurementModel mm(1.0, 0.0, 1);
  const auto out = train_exhaustive(2, ch, mm);
  CHECK(out.total_measurements == 64);
  CHECK(out.detected[0] == DetectedPair{2, 7});
  CHECK(out.detected[1] == DetectedPair{5, 1});
}
