#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adeb/field.hpp"
#include "adeb/planner.hpp"

namespace adeb {

// Fraction of the tolerance-derived bound used when no budget is given.
// The tolerance heuristic assumes white, uniform errors; at large bounds the
// codec's errors in smooth regions are correlated and the heuristic overshoots.
inline constexpr double kDefaultBudgetMargin = 0.1;

struct PipelineConfig {
  // Input: a field file, or a synthetic spec when field_path is empty.
  std::filesystem::path field_path;
  Role role = Role::baryon_density;
  std::string preset = "heterogeneous";
  Dims3 dims{128, 128, 128};
  std::uint64_t seed = 1;
  // Extra snapshots (files) for the multi-snapshot table; with a synthetic
  // input, `snapshots` > 1 generates an evolving sequence instead.
  std::vector<std::filesystem::path> snapshot_paths;
  std::size_t snapshots = 1;

  Dims3 block_dims{32, 32, 32};
  double t_boundary = 88.16;
  std::optional<double> t_halo;  // defaults to 2 * t_boundary
  std::optional<double> eb_avg;
  std::optional<double> target_sigma;
  std::optional<double> mass_fault_budget;  // defaults to the uniform plan's predicted fault
  std::optional<double> k_cut;              // defaults to N / 8 (smallest axis)
  double tol = 0.01;
  double budget_margin = kDefaultBudgetMargin;
  std::optional<Strategy> strategy;  // defaults to combined for baryon density, fft otherwise

  std::filesystem::path rate_model_path;  // calibrate when empty
  std::size_t calibration_stride = 4;
  std::size_t calibration_points = 8;
  std::size_t probe = 0;  // 1: measure C_m per partition instead of estimating from the mean

  std::filesystem::path output_dir = "adeb-report";
  unsigned threads = 1;

  double halo_threshold() const { return t_halo.value_or(2.0 * t_boundary); }
  double k_cut_for(const Dims3& d) const;
  Strategy strategy_for(Role r) const;

  // Throws ArgumentError on inconsistent settings.
  void validate() const;
};

using ConfigMap = std::map<std::string, std::string>;

// Flat key=value lines; '#' starts a comment; blank lines ignored.
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::filesystem::path& path);

// Applies entries onto cfg (later calls win). Unknown keys throw ArgumentError.
void apply_config(PipelineConfig& cfg, const ConfigMap& entries);

// defaults < file < overrides, then validate().
PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const ConfigMap& overrides);

// Round-trippable key=value rendering.
std::string to_config_text(const PipelineConfig& cfg);

}  // namespace adeb
