#pragma once

#include <cstdint>
#include <string_view>

#include "adeb/field.hpp"

namespace adeb {

// Parameters of a Gaussian random field with power spectrum
// P(k) ~ k^-spectral_index * exp(-(k / damping_k)^2), mapped per role:
//   densities:   amplitude * exp(log_sigma * g + texture_sigma * t)   (log-normal)
//   temperature: amplitude * exp(log_sigma * g + texture_sigma * t) + offset
//   velocity:    amplitude * g                                       (zero mean)
//   generic:     offset + amplitude * g
// where g is the unit-variance field and t an independent unit-variance
// small-scale texture with index texture_index (log-normal roles only).
// Values are clamped to the role range.
struct SynthesisSpec {
  Role role = Role::baryon_density;
  Dims3 dims{128, 128, 128};
  double spectral_index = 3.0;
  double damping_k = 0.0;  // 0 disables damping
  double log_sigma = 1.0;
  double amplitude = 1.0;
  double offset = 0.0;
  double texture_index = 0.0;
  double texture_sigma = 0.0;  // 0 disables the texture component

  // Named presets: "heterogeneous" (default) or "smooth".
  static SynthesisSpec preset(std::string_view name, Role role, Dims3 dims);
};

// Deterministic for fixed (spec, seed).
Field3D generate_synthetic(const SynthesisSpec& spec, std::uint64_t seed);

// Unit-variance Gaussian random field with the spec's spectrum.
std::vector<double> gaussian_random_field(const SynthesisSpec& spec, std::uint64_t seed);

}  // namespace adeb
