#include "beamtrain/array.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "beamtrain/errors.hpp"

namespace beamtrain {

void check_cosine(double omega) {
  if (!std::isfinite(omega) || omega < -1.0 || omega > 1.0) {
    throw InvalidArgument(fmt::format("direction cosine {} outside [-1, 1]", omega));
  }
}

ComplexVector steering_vector(int n, double omega) {
  if (n < 1) throw InvalidArgument(fmt::format("array size must be >= 1, got {}", n));
  check_cosine(omega);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexVector out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = std::polar(amp, kPi * k * omega);
  return out;
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(
        fmt::format("inner product of lengths {} and {}", a.size(), b.size()));
  }
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return acc;
}

double norm(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

cplx beam_gain(std::span<const cplx> v, double omega) {
  if (v.empty()) throw InvalidArgument("beam gain of an empty vector");
  check_cosine(omega);
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc += v[k] * std::polar(1.0, -kPi * static_cast<double>(k) * omega);
  }
  return acc;
}

std::vector<PatternPoint> pattern_samples(std::span<const cplx> v, int grid_size) {
  if (grid_size < 2) {
    throw InvalidArgument(fmt::format("pattern grid needs >= 2 points, got {}", grid_size));
  }
  std::vector<PatternPoint> out;
  out.reserve(static_cast<std::size_t>(grid_size));
  const double step = 2.0 / (grid_size - 1);
  for (int k = 0; k < grid_size; ++k) {
    // Pin the last point so rounding never leaves the domain.
    const double omega = (k == grid_size - 1) ? 1.0 : -1.0 + k * step;
    out.push_back({omega, std::abs(beam_gain(v, omega))});
  }
  return out;
}

void write_pattern(std::ostream& out, std::span<const PatternPoint> points,
                   std::string_view header) {
  std::size_t start = 0;
  while (start < header.size()) {
    auto end = header.find('\n', start);
    if (end == std::string_view::npos) end = header.size();
    out << "# " << header.substr(start, end - start) << '\n';
    start = end + 1;
  }
  out << "# omega |gain|\n";
  for (const auto& p : points) out << fmt::format("{:.9f} {:.12e}\n", p.omega, p.magnitude);
}

}  // namespace beamtrain
