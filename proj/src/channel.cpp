#include "beamtrain/channel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "beamtrain/codebook.hpp"
#include "beamtrain/errors.hpp"

namespace beamtrain {

ChannelRealization::ChannelRealization(int nt, int nr, std::vector<PathComponent> paths)
    : nt_(nt), nr_(nr), paths_(std::move(paths)) {
  if (nt < 1 || nr < 1) throw InvalidArgument(fmt::format("array sizes {}x{}", nt, nr));
  if (paths_.empty()) throw InvalidArgument("channel needs at least one path");
  for (const auto& p : paths_) {
    check_cosine(p.aod);
    check_cosine(p.aoa);
    if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag())) {
      throw InvalidArgument("non-finite path gain");
    }
  }
  scale_ = std::sqrt(static_cast<double>(nt_) * nr_ / static_cast<double>(paths_.size()));
  for (const auto& p : paths_) {
    tx_response_.push_back(steering_vector(nt_, p.aod));
    rx_response_.push_back(steering_vector(nr_, p.aoa));
  }
}

ChannelRealization draw_channel(int nt, int nr, int num_paths, AngleMode mode, Rng& rng) {
  if (num_paths < 1) throw InvalidArgument(fmt::format("path count {} < 1", num_paths));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<PathComponent> paths;
  paths.reserve(static_cast<std::size_t>(num_paths));

  if (mode == AngleMode::continuous) {
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    for (int l = 0; l < num_paths; ++l) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      const double aod = angle(rng);
      const double aoa = angle(rng);
      paths.push_back({{re, im}, aod, aoa});
    }
    return ChannelRealization(nt, nr, std::move(paths));
  }

  if (num_paths > std::min(nt, nr)) {
    throw InvalidArgument(fmt::format(
        "on-grid channel with {} paths needs that many distinct bins on each side", num_paths));
  }
  std::uniform_int_distribution<int> tx_bin(1, nt);
  std::uniform_int_distribution<int> rx_bin(1, nr);
  std::set<int> used_tx, used_rx;
  for (int l = 0; l < num_paths; ++l) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    int p = tx_bin(rng);
    while (used_tx.count(p)) p = tx_bin(rng);
    int q = rx_bin(rng);
    while (used_rx.count(q)) q = rx_bin(rng);
    used_tx.insert(p);
    used_rx.insert(q);
    paths.push_back({{re, im}, bottom_center(nt, p), bottom_center(nr, q)});
  }
  return ChannelRealization(nt, nr, std::move(paths));
}

ComplexVector apply_channel(const ChannelRealization& ch, std::span<const cplx> v) {
  if (static_cast<int>(v.size()) != ch.nt()) {
    throw DimensionMismatch(
        fmt::format("codeword length {} does not match Nt = {}", v.size(), ch.nt()));
  }
  ComplexVector out(static_cast<std::size_t>(ch.nr()), cplx{0.0, 0.0});
  for (int l = 0; l < ch.num_paths(); ++l) {
    const cplx coeff = ch.scale() * ch.paths()[l].gain * inner_product(ch.tx_response(l), v);
    if (coeff == cplx{0.0, 0.0}) continue;
    const auto& rx = ch.rx_response(l);
    for (int k = 0; k < ch.nr(); ++k) out[k] += coeff * rx[k];
  }
  return out;
}

MeasurementModel::MeasurementModel(double power, double noise_variance, std::uint64_t seed)
    : MeasurementModel(power, noise_variance, Rng(seed)) {}

MeasurementModel::MeasurementModel(double power, double noise_variance, Rng rng)
    : power_(power), noise_variance_(noise_variance), rng_(std::move(rng)) {
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw InvalidArgument(fmt::format("transmit power must be positive, got {}", power));
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument(fmt::format("noise variance must be >= 0, got {}", noise_variance));
  }
}

cplx MeasurementModel::measure(const ChannelRealization& ch, std::span<const cplx> v,
                               std::span<const cplx> w) {
  if (static_cast<int>(w.size()) != ch.nr()) {
    throw DimensionMismatch(
        fmt::format("combiner length {} does not match Nr = {}", w.size(), ch.nr()));
  }
  const ComplexVector hv = apply_channel(ch, v);
  cplx y = std::sqrt(power_) * inner_product(w, hv);
  if (noise_variance_ > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_variance_ / 2.0));
    cplx noise{0.0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double re = gauss(rng_);
      const double im = gauss(rng_);
      noise += std::conj(w[k]) * cplx{re, im};
    }
    y += noise;
  }
  ++count_;
  return y;
}

double snr_to_noise(double snr_db, double power) {
  if (!(power > 0.0)) throw InvalidArgument(fmt::format("power must be positive, got {}", power));
  return power / std::pow(10.0, snr_db / 10.0);
}

void write_channel(std::ostream& out, const ChannelRealization& ch) {
  out << ch.nt() << ' ' << ch.nr() << ' ' << ch.num_paths() << '\n';
  for (const auto& p : ch.paths()) {
    out << fmt::format("{:.17g} {:.17g} {:.17g} {:.17g}\n", p.gain.real(), p.gain.imag(), p.aod,
                       p.aoa);
  }
}

ChannelRealization read_channel(std::istream& in) {
  std::string line;
  auto next_line = [&](std::string& dst) {
    while (std::getline(in, dst)) {
      const auto first = dst.find_first_not_of(" \t\r");
      if (first == std::string::npos || dst[first] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line(line)) throw InvalidArgument("channel fixture is empty");
  int nt = 0, nr = 0, num_paths = 0;
  {
    std::istringstream header(line);
    if (!(header >> nt >> nr >> num_paths) || num_paths < 1) {
      throw InvalidArgument(fmt::format("bad channel fixture header '{}'", line));
    }
  }
  std::vector<PathComponent> paths;
  for (int l = 0; l < num_paths; ++l) {
    if (!next_line(line)) {
      throw InvalidArgument(fmt::format("channel fixture has {} of {} paths", l, num_paths));
    }
    std::istringstream row(line);
    double re = 0, im = 0, aod = 0, aoa = 0;
    if (!(row >> re >> im >> aod >> aoa)) {
      throw InvalidArgument(fmt::format("bad channel fixture path line '{}'", line));
    }
    paths.push_back({{re, im}, aod, aoa});
  }
  return ChannelRealization(nt, nr, std::move(paths));
}

}  // namespace beamtrain
