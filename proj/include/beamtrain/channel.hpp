#pragma once

// Sparse multipath channel H = sqrt(Nt Nr / L) sum_l g_l alpha(Nr, aoa_l) alpha(Nt, aod_l)^H
// and the noisy scalar training measurement y = sqrt(P) w^H H v + w^H eta.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "beamtrain/array.hpp"

namespace beamtrain {

using Rng = std::mt19937_64;

struct PathComponent {
  cplx gain;
  double aod;  // transmit direction cosine
  double aoa;  // receive direction cosine
};

class ChannelRealization {
 public:
  ChannelRealization(int nt, int nr, std::vector<PathComponent> paths);

  int nt() const noexcept { return nt_; }
  int nr() const noexcept { return nr_; }
  int num_paths() const noexcept { return static_cast<int>(paths_.size()); }
  const std::vector<PathComponent>& paths() const noexcept { return paths_; }

  /// sqrt(Nt Nr / L).
  double scale() const noexcept { return scale_; }

  /// alpha(Nt, aod_l) and alpha(Nr, aoa_l).
  const ComplexVector& tx_response(int l) const { return tx_response_.at(l); }
  const ComplexVector& rx_response(int l) const { return rx_response_.at(l); }

 private:
  int nt_;
  int nr_;
  std::vector<PathComponent> paths_;
  double scale_;
  std::vector<ComplexVector> tx_response_;
  std::vector<ComplexVector> rx_response_;
};

enum class AngleMode {
  continuous,  // uniform on [-1, 1]
  on_grid,     // uniform over bottom beam centers; all AoD bins distinct, all AoA bins distinct
};

/// Gains are i.i.d. CN(0, 1).
ChannelRealization draw_channel(int nt, int nr, int num_paths, AngleMode mode, Rng& rng);

/// H v evaluated path by path without forming H.
ComplexVector apply_channel(const ChannelRealization& ch, std::span<const cplx> v);

/// Transmit power and noise variance for a run of training measurements.
/// Owns the noise generator and counts every measurement taken.
class MeasurementModel {
 public:
  MeasurementModel(double power, double noise_variance, std::uint64_t seed);
  MeasurementModel(double power, double noise_variance, Rng rng);

  /// sqrt(P) w^H H v + w^H eta with a fresh eta ~ CN(0, sigma^2 I). The
  /// training symbol is fixed to 1.
  cplx measure(const ChannelRealization& ch, std::span<const cplx> v, std::span<const cplx> w);

  double power() const noexcept { return power_; }
  double noise_variance() const noexcept { return noise_variance_; }
  std::int64_t count() const noexcept { return count_; }
  Rng& rng() noexcept { return rng_; }

 private:
  double power_;
  double noise_variance_;
  Rng rng_;
  std::int64_t count_ = 0;
};

/// sigma^2 = P / 10^(snr_db / 10).
double snr_to_noise(double snr_db, double power);

/// Fixture text: header `Nt Nr L`, then one `lambda_re lambda_im omega_t omega_r` line per path.
void write_channel(std::ostream& out, const ChannelRealization& ch);
ChannelRealization read_channel(std::istream& in);

}  // namespace beamtrain
