#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "adeb/features.hpp"
#include "adeb/field.hpp"

namespace adeb {

enum class Connectivity { face6, full26 };

struct Halo {
  std::size_t id = 0;
  std::size_t cell_count = 0;
  double mass = 0.0;                  // sum of member cell values
  std::array<double, 3> centroid{};   // unweighted mean cell coordinate
  double peak = 0.0;
  std::size_t peak_index = 0;
};

struct HaloCatalog {
  std::vector<Halo> halos;  // ordered by (cell_count desc, peak_index asc); id = position
  double t_boundary = kDefaultBoundaryThreshold;
  double t_halo = 2.0 * kDefaultBoundaryThreshold;
  Dims3 dims;
  std::vector<std::int32_t> labels;  // per cell: halo id or -1

  double total_mass() const;
};

// Candidates are cells with value > t_boundary; connected components whose
// peak exceeds t_halo become halos.
HaloCatalog find_halos(const Field3D& density, double t_boundary, double t_halo,
                       Connectivity connectivity = Connectivity::face6);
HaloCatalog find_halos(std::span<const float> values, const Dims3& dims, double t_boundary, double t_halo,
                       Connectivity connectivity = Connectivity::face6);

// Cells with value in the open interval (t_boundary - eb, t_boundary + eb).
std::size_t count_boundary_cells(std::span<const float> values, double t_boundary, double eb);

struct FaultPrediction {
  std::vector<double> e_m;          // expected candidacy flips per partition, n_bc / 4
  std::vector<double> sigma_cells;  // sqrt(n_bc / 3), large-halo cell-count spread
  double mass_fault = 0.0;          // t_boundary * sum e_m
};

// n_bc(m) = n_ref(m) * eb_m, linear in the bound from the eb_ref = 1 count.
FaultPrediction predict_fault(std::span<const PartitionFeatures> features, std::span<const double> ebs,
                              double t_boundary);

struct CandidacyChange {
  std::size_t gained = 0;  // out -> in
  std::size_t lost = 0;    // in -> out
  std::size_t total() const { return gained + lost; }
  long long net() const { return static_cast<long long>(gained) - static_cast<long long>(lost); }
};
CandidacyChange count_candidacy_changes(std::span<const float> orig, std::span<const float> recon,
                                        double t_boundary);

struct HaloMatch {
  std::size_t orig_id = 0;
  std::size_t recon_id = 0;
  double displacement = 0.0;
  double mass_ratio = 1.0;                // recon / orig
  long long cell_delta = 0;               // recon - orig
  double mass_delta = 0.0;                // recon - orig
  double mass_per_changed_cell = 0.0;     // |mass_delta| / |cell_delta|, NaN when no cell changed
};

struct CatalogComparison {
  std::vector<HaloMatch> matches;
  std::vector<std::size_t> unmatched_orig;
  std::vector<std::size_t> unmatched_recon;
  double match_radius = 2.0;
  std::size_t min_cells = 10;
  double mean_displacement = 0.0;
  double max_displacement = 0.0;
  double mass_ratio_rms = 1.0;   // sqrt(mean((recon/orig)^2)) over matched halos >= min_cells
  double mass_rel_rmse = 0.0;    // sqrt(mean((recon/orig - 1)^2)) over the same halos
  double total_abs_mass_change = 0.0;  // sum |mass_delta| over matched halos
};

// Greedy nearest-centroid matching within match_radius; ties go to the
// heavier original halo.
CatalogComparison compare_catalogs(const HaloCatalog& orig, const HaloCatalog& recon, double match_radius = 2.0,
                                   std::size_t min_cells = 10);

// CSV columns: id, cell_count, mass, cx, cy, cz, peak
void write_catalog_csv(std::ostream& out, const HaloCatalog& catalog);
// Summary block of '#' lines followed by one row per match.
void write_comparison_csv(std::ostream& out, const HaloCatalog& orig, const HaloCatalog& recon,
                          const CatalogComparison& cmp);

}  // namespace adeb
