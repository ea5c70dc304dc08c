#pragma once

// Uniform-linear-array primitives. Directions are direction cosines in [-1, 1]
// with half-wavelength element spacing.

#include <complex>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace beamtrain {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;

/// Throws InvalidArgument unless omega is a finite value in [-1, 1].
void check_cosine(double omega);

/// alpha(N, omega) = N^{-1/2} [1, e^{j pi omega}, ..., e^{j (N-1) pi omega}]^T.
ComplexVector steering_vector(int n, double omega);

/// a^H b.
cplx inner_product(std::span<const cplx> a, std::span<const cplx> b);

double norm(std::span<const cplx> v);

/// Array factor sum_n v_n e^{-j pi n omega}, n = 0..N-1. Equal to
/// sqrt(N) alpha(N, omega)^H v, so a matched unit-norm steering vector gives sqrt(N).
cplx beam_gain(std::span<const cplx> v, double omega);

struct PatternPoint {
  double omega;
  double magnitude;
};

/// |beam_gain| on a uniform grid of `grid_size` points spanning [-1, 1],
/// both endpoints included.
std::vector<PatternPoint> pattern_samples(std::span<const cplx> v, int grid_size);

/// Two-column dump: `#`-prefixed header lines, then one `omega |gain|` row per point.
void write_pattern(std::ostream& out, std::span<const PatternPoint> points,
                   std::string_view header = {});

}  // namespace beamtrain
