#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "beamtrain/array.hpp"
#include "beamtrain/codebook.hpp"
#include "beamtrain/errors.hpp"
#include "oracles.hpp"

using namespace beamtrain;

TEST_CASE("steering vector at broadside and endfire") {
  const auto v0 = steering_vector(4, 0.0);
  REQUIRE(v0.size() == 4);
  for (const auto& x : v0) CHECK(std::abs(x - cplx{0.5, 0.0}) < 1e-15);

  const auto v1 = steering_vector(4, 1.0);
  const double expected[] = {0.5, -0.5, 0.5, -0.5};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(v1[k] - cplx{expected[k], 0.0}) < 1e-15);
}

TEST_CASE("steering vector entries match direct evaluation") {
  const double omega = -1.0 + 1.0 / 16.0;
  const auto v = steering_vector(16, omega);
  for (int k = 0; k < 16; ++k) {
    CHECK(std::abs(v[k] - oracle::steering_entry(16, omega, k)) < 1e-14);
  }
  CHECK(std::abs(norm(v) - 1.0) < 1e-14);
}

TEST_CASE("steering vector rejects bad arguments") {
  CHECK_THROWS_AS(steering_vector(0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(steering_vector(8, 1.0000001), InvalidArgument);
  CHECK_THROWS_AS(steering_vector(8, -1.5), InvalidArgument);
  CHECK_THROWS_AS(steering_vector(8, std::nan("")), InvalidArgument);
}

TEST_CASE("unit norm for random sizes and directions") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 1024);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    CHECK(std::abs(norm(steering_vector(n, angle(rng))) - 1.0) < 1e-12);
  }
}

TEST_CASE("inner product") {
  const auto a = steering_vector(8, 0.3);
  CHECK(std::abs(inner_product(a, a) - cplx{1.0, 0.0}) < 1e-14);

  const ComplexVector e1{{1, 0}, {0, 0}};
  const ComplexVector e2{{0, 0}, {1, 0}};
  CHECK(std::abs(inner_product(e1, e2)) == 0.0);

  // Conjugation is on the first argument.
  const ComplexVector x{{0, 1}};
  const ComplexVector y{{1, 0}};
  CHECK(std::abs(inner_product(x, y) - cplx{0, -1}) < 1e-15);

  CHECK_THROWS_AS(inner_product(e1, ComplexVector(3)), DimensionMismatch);
}

TEST_CASE("grid orthogonality: cosines 2k/N apart are orthogonal") {
  const int n = 16;
  const double base = -1.0 + 0.03;
  for (int k = 1; k < n; ++k) {
    double other = base + 2.0 * k / n;
    if (other > 1.0) other -= 2.0;  // alpha is 2-periodic in omega
    const cplx ip = inner_product(steering_vector(n, base), steering_vector(n, other));
    CHECK(std::abs(ip) < 1e-12);
    CHECK(std::abs(oracle::dirichlet_sum(n, other - base)) < 1e-12);
  }

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);
  for (int n : {2, 8, 32, 64, 128}) {
    for (int trial = 0; trial < 20; ++trial) {
      const double w = angle(rng);
      const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
      double other = w + 2.0 * k / n;
      while (other > 1.0) other -= 2.0;
      CHECK(std::abs(inner_product(steering_vector(n, w), steering_vector(n, other))) < 1e-10);
    }
  }
}

TEST_CASE("beam gain examples") {
  const double omega0 = 0.37;
  CHECK(std::abs(beam_gain(steering_vector(16, omega0), omega0) - cplx{4.0, 0.0}) < 1e-13);

  const ComplexVector zero(8);
  CHECK(std::abs(beam_gain(zero, -0.2)) == 0.0);

  // Bottom beam 5 of 16 seen from the edge of its coverage, 1/16 off center.
  const auto f5 = bottom_codeword(16, 5).weights;
  const double edge = -1.0 + 2.0 * 5 / 16.0;
  const double closed_form = 1.0 / (4.0 * std::sin(kPi / 32.0));
  CHECK(closed_form == doctest::Approx(2.5505).epsilon(1e-4));
  CHECK(std::abs(beam_gain(f5, edge)) == doctest::Approx(closed_form).epsilon(1e-12));
  CHECK(4.0 * oracle::dirichlet_magnitude(16, 1.0 / 16.0) ==
        doctest::Approx(closed_form).epsilon(1e-12));
  CHECK(std::abs(4.0 * oracle::dirichlet_sum(16, 1.0 / 16.0)) ==
        doctest::Approx(closed_form).epsilon(1e-12));

  CHECK_THROWS_AS(beam_gain(zero, 1.5), InvalidArgument);
  CHECK_THROWS_AS(beam_gain(ComplexVector{}, 0.0), InvalidArgument);
}

TEST_CASE("beam gain agrees with sqrt(N) alpha^H v and is linear") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 64);
    const auto v1 = oracle::random_vector(n, rng);
    const auto v2 = oracle::random_vector(n, rng);
    const double w = angle(rng);

    cplx explicit_loop{0.0, 0.0};
    for (int k = 0; k < n; ++k) explicit_loop += std::conj(oracle::steering_entry(n, w, k)) * v1[k];
    explicit_loop *= std::sqrt(static_cast<double>(n));
    const cplx g1 = beam_gain(v1, w);
    CHECK(std::abs(g1 - explicit_loop) < 1e-12 * (1.0 + std::abs(g1)));

    const cplx a{0.3, -1.2}, b{-0.7, 0.4};
    ComplexVector mix(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) mix[k] = a * v1[k] + b * v2[k];
    const cplx expected = a * g1 + b * beam_gain(v2, w);
    CHECK(std::abs(beam_gain(mix, w) - expected) < 1e-10);
  }
}

TEST_CASE("pattern samples") {
  const auto pts = pattern_samples(steering_vector(4, 0.0), 3);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].omega == -1.0);
  CHECK(pts[1].omega == 0.0);
  CHECK(pts[2].omega == 1.0);
  CHECK(pts[1].magnitude == doctest::Approx(2.0).epsilon(1e-14));

  for (const auto& p : pattern_samples(ComplexVector(8), 17)) CHECK(p.magnitude == 0.0);

  CHECK_THROWS_AS(pattern_samples(steering_vector(4, 0.0), 1), InvalidArgument);

  // Deterministic.
  const auto again = pattern_samples(steering_vector(4, 0.0), 3);
  for (int k = 0; k < 3; ++k) CHECK(again[k].magnitude == pts[k].magnitude);
}

TEST_CASE("upper-half codeword pattern is high on [0,1] and low on [-1,0)") {
  const auto v = synthesize(initial_index_set(1, 2, 16)).weights;
  const auto pts = pattern_samples(v, 1024);
  double min_in = 1e9, max_out = 0.0, peak = 0.0;
  for (const auto& p : pts) {
    peak = std::max(peak, p.magnitude);
    // Stay one bottom beam away from the coverage edges, where the main lobe rolls off.
    if (p.omega >= 1.0 / 16 && p.omega <= 1.0 - 1.0 / 16) min_in = std::min(min_in, p.magnitude);
    if (p.omega <= -1.0 / 16 && p.omega >= -1.0 + 1.0 / 16) max_out = std::max(max_out, p.magnitude);
  }
  // Grid centers sit at sqrt(16/8); midpoint alignment keeps the ripple shallow.
  CHECK(min_in > 0.8 * std::sqrt(2.0));
  CHECK(peak < 1.25 * std::sqrt(2.0));
  CHECK(max_out < 0.35 * std::sqrt(2.0));
}

TEST_CASE("pattern dump format") {
  const auto pts = pattern_samples(steering_vector(4, 0.0), 3);
  std::ostringstream os;
  write_pattern(os, pts, "first\nsecond");
  std::istringstream in(os.str());
  std::string line;
  int headers = 0, rows = 0;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) {
      ++headers;
      continue;
    }
    std::istringstream row(line);
    double omega = 0, mag = 0;
    REQUIRE(static_cast<bool>(row >> omega >> mag));
    CHECK(omega == doctest::Approx(pts[rows].omega));
    CHECK(mag == doctest::Approx(pts[rows].magnitude));
    ++rows;
  }
  CHECK(headers == 3);
  CHECK(rows == 3);
}
