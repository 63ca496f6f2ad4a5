#include "adeb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "adeb/error.hpp"
#include "adeb/fft.hpp"

namespace adeb {

SynthesisSpec SynthesisSpec::preset(std::string_view name, Role role, Dims3 dims) {
  SynthesisSpec s;
  s.role = role;
  s.dims = dims;
  const bool smooth = name == "smooth";
  if (!smooth && name != "heterogeneous") {
    throw ArgumentError("unknown synthesis preset '" + std::string(name) + "'");
  }
  switch (role) {
    case Role::baryon_density:
    case Role::dark_matter_density:
      s.spectral_index = smooth ? 2.0 : 5.0;
      s.log_sigma = smooth ? 0.5 : 3.5;
      s.amplitude = role == Role::baryon_density ? 10.0 : 5.0;
      break;
    case Role::temperature:
      s.spectral_index = smooth ? 2.0 : 5.0;
      s.log_sigma = smooth ? 0.3 : 1.5;
      s.amplitude = 1e4;
      s.offset = 1e2;
      break;
    case Role::velocity_x:
    case Role::velocity_y:
    case Role::velocity_z:
      s.spectral_index = smooth ? 2.0 : 4.0;
      s.amplitude = 1e6;
      break;
    case Role::generic:
      s.spectral_index = 2.0;
      s.amplitude = 1.0;
      break;
  }
  return s;
}

std::vector<double> gaussian_random_field(const SynthesisSpec& spec, std::uint64_t seed) {
  const auto& d = spec.dims;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(d.cells());
  for (auto& w : white) w = normal(rng);

  auto grid = dft3_forward(white, d);
  for (std::size_t i = 0; i < d.nx; ++i) {
    const double kx = static_cast<double>(signed_frequency(i, d.nx));
    for (std::size_t j = 0; j < d.ny; ++j) {
      const double ky = static_cast<double>(signed_frequency(j, d.ny));
      for (std::size_t l = 0; l < d.nz; ++l) {
        const double kz = static_cast<double>(signed_frequency(l, d.nz));
        const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
        double amp = 0.0;
        if (k > 0.0) {
          amp = std::pow(k, -0.5 * spec.spectral_index);
          if (spec.damping_k > 0.0) amp *= std::exp(-0.5 * (k / spec.damping_k) * (k / spec.damping_k));
        }
        grid.data[d.index(i, j, l)] *= amp;
      }
    }
  }
  dft3_inverse_inplace(grid);

  std::vector<double> g(d.cells());
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = grid.data[i].real();
    sum += g[i];
  }
  const double mean = sum / static_cast<double>(g.size());
  for (auto& v : g) {
    v -= mean;
    sq += v * v;
  }
  const double sd = std::sqrt(sq / static_cast<double>(g.size()));
  if (sd > 0.0) {
    for (auto& v : g) v /= sd;
  }
  return g;
}

Field3D generate_synthetic(const SynthesisSpec& spec, std::uint64_t seed) {
  const auto& d = spec.dims;
  if (d.nx < 8 || d.ny < 8 || d.nz < 8) throw ArgumentError("synthetic fields need dims >= 8 per axis");
  if (!(spec.spectral_index >= 0.0)) throw ArgumentError("spectral_index must be non-negative");
  if (!(spec.log_sigma >= 0.0) || !(spec.amplitude >= 0.0) || !(spec.texture_sigma >= 0.0)) {
    throw ArgumentError("log_sigma and amplitude must be non-negative");
  }

  const auto g = gaussian_random_field(spec, seed);
  std::vector<double> t(g.size(), 0.0);
  if (spec.texture_sigma > 0.0) {
    auto texture = spec;
    texture.spectral_index = spec.texture_index;
    texture.damping_k = 0.0;
    t = gaussian_random_field(texture, seed ^ 0x9e3779b97f4a7c15ULL);
  }
  const auto range = default_range(spec.role);
  std::vector<float> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double v = 0.0;
    switch (spec.role) {
      case Role::baryon_density:
      case Role::dark_matter_density: v = spec.amplitude * std::exp(spec.log_sigma * g[i] + spec.texture_sigma * t[i]); break;
      case Role::temperature: v = spec.amplitude * std::exp(spec.log_sigma * g[i] + spec.texture_sigma * t[i]) + spec.offset;
        break;
      case Role::velocity_x:
      case Role::velocity_y:
      case Role::velocity_z: v = spec.amplitude * g[i]; break;
      case Role::generic: v = spec.offset + spec.amplitude * g[i]; break;
    }
    v = std::clamp(v, range.first, range.second);
    values[i] = static_cast<float>(v);
    // float rounding can step just outside the declared range
    values[i] = std::clamp(values[i], static_cast<float>(range.first), static_cast<float>(range.second));
  }
  return Field3D(std::string(to_string(spec.role)), spec.role, d, std::move(values), range);
}

}  // namespace adeb
