#include "adeb/halo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

#include "adeb/error.hpp"

namespace adeb {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Smaller index becomes the root so labels are order-independent.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

double HaloCatalog::total_mass() const {
  double m = 0.0;
  for (const auto& h : halos) m += h.mass;
  return m;
}

HaloCatalog find_halos(std::span<const float> values, const Dims3& dims, double t_boundary, double t_halo,
                       Connectivity connectivity) {
  if (!(t_boundary > 0.0) || !(t_halo >= t_boundary)) {
    throw ArgumentError("find_halos needs t_halo >= t_boundary > 0");
  }
  if (values.size() != dims.cells()) throw ArgumentError("find_halos: value count does not match dims");

  const std::size_t n = values.size();
  DisjointSet sets(n);
  auto candidate = [&](std::size_t i) { return static_cast<double>(values[i]) > t_boundary; };

  // Backward neighbours only; each edge is visited once.
  std::vector<std::array<long, 3>> offsets;
  for (long dx = -1; dx <= 0; ++dx) {
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dz = -1; dz <= 1; ++dz) {
        const long lin = (dx * static_cast<long>(dims.ny) + dy) * static_cast<long>(dims.nz) + dz;
        if (lin >= 0) continue;
        const int manhattan = std::abs(static_cast<int>(dx)) + std::abs(static_cast<int>(dy)) + std::abs(static_cast<int>(dz));
        if (connectivity == Connectivity::face6 && manhattan != 1) continue;
        offsets.push_back({dx, dy, dz});
      }
    }
  }

  for (std::size_t x = 0; x < dims.nx; ++x) {
    for (std::size_t y = 0; y < dims.ny; ++y) {
      for (std::size_t z = 0; z < dims.nz; ++z) {
        const auto i = dims.index(x, y, z);
        if (!candidate(i)) continue;
        for (const auto& o : offsets) {
          const long nx = static_cast<long>(x) + o[0], ny = static_cast<long>(y) + o[1],
                     nz = static_cast<long>(z) + o[2];
          if (nx < 0 || ny < 0 || nz < 0 || ny >= static_cast<long>(dims.ny) || nz >= static_cast<long>(dims.nz)) {
            continue;
          }
          const auto j = dims.index(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                                    static_cast<std::size_t>(nz));
          if (candidate(j)) sets.unite(i, j);
        }
      }
    }
  }

  struct Acc {
    std::size_t cells = 0;
    double mass = 0.0;
    std::array<double, 3> sum{};
    double peak = -std::numeric_limits<double>::infinity();
    std::size_t peak_index = 0;
  };
  std::vector<std::int64_t> root_slot(n, -1);
  std::vector<Acc> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (!candidate(i)) continue;
    const auto r = sets.find(i);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<std::int64_t>(groups.size());
      groups.emplace_back();
    }
    auto& g = groups[static_cast<std::size_t>(root_slot[r])];
    const double v = values[i];
    const auto c = dims.coords(i);
    g.cells++;
    g.mass += v;
    for (int a = 0; a < 3; ++a) g.sum[a] += static_cast<double>(c[a]);
    if (v > g.peak) {
      g.peak = v;
      g.peak_index = i;
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].peak > t_halo) order.push_back(g);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_tuple(-static_cast<long long>(groups[a].cells), groups[a].peak_index) <
           std::make_tuple(-static_cast<long long>(groups[b].cells), groups[b].peak_index);
  });

  HaloCatalog cat;
  cat.t_boundary = t_boundary;
  cat.t_halo = t_halo;
  cat.dims = dims;
  cat.labels.assign(n, -1);
  std::vector<std::int32_t> group_to_halo(groups.size(), -1);
  for (std::size_t h = 0; h < order.size(); ++h) {
    const auto& g = groups[order[h]];
    Halo halo;
    halo.id = h;
    halo.cell_count = g.cells;
    halo.mass = g.mass;
    for (int a = 0; a < 3; ++a) halo.centroid[a] = g.sum[a] / static_cast<double>(g.cells);
    halo.peak = g.peak;
    halo.peak_index = g.peak_index;
    cat.halos.push_back(halo);
    group_to_halo[order[h]] = static_cast<std::int32_t>(h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (candidate(i)) cat.labels[i] = group_to_halo[static_cast<std::size_t>(root_slot[sets.find(i)])];
  }
  return cat;
}

HaloCatalog find_halos(const Field3D& density, double t_boundary, double t_halo, Connectivity connectivity) {
  return find_halos(density.values(), density.dims(), t_boundary, t_halo, connectivity);
}

std::size_t count_boundary_cells(std::span<const float> values, double t_boundary, double eb) {
  if (!(eb > 0.0)) throw ArgumentError("count_boundary_cells needs eb > 0");
  const double lo = t_boundary - eb, hi = t_boundary + eb;
  std::size_t n = 0;
  for (float v : values) n += (v > lo && v < hi) ? 1 : 0;
  return n;
}

FaultPrediction predict_fault(std::span<const PartitionFeatures> features, std::span<const double> ebs,
                              double t_boundary) {
  if (features.size() != ebs.size()) throw ArgumentError("predict_fault: features and bounds are not aligned");
  FaultPrediction p;
  double sum = 0.0;
  for (std::size_t m = 0; m < ebs.size(); ++m) {
    if (!(ebs[m] > 0.0)) throw ArgumentError("predict_fault: error bounds must be positive");
    const double n_bc = features[m].n_ref * ebs[m];
    p.e_m.push_back(n_bc / 4.0);
    p.sigma_cells.push_back(std::sqrt(n_bc / 3.0));
    sum += n_bc / 4.0;
  }
  p.mass_fault = t_boundary * sum;
  return p;
}

CandidacyChange count_candidacy_changes(std::span<const float> orig, std::span<const float> recon,
                                        double t_boundary) {
  if (orig.size() != recon.size()) throw ArgumentError("count_candidacy_changes: shape mismatch");
  CandidacyChange c;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    const bool a = static_cast<double>(orig[i]) > t_boundary;
    const bool b = static_cast<double>(recon[i]) > t_boundary;
    if (!a && b) ++c.gained;
    if (a && !b) ++c.lost;
  }
  return c;
}

CatalogComparison compare_catalogs(const HaloCatalog& orig, const HaloCatalog& recon, double match_radius,
                                   std::size_t min_cells) {
  CatalogComparison cmp;
  cmp.match_radius = match_radius;
  cmp.min_cells = min_cells;

  struct Pair {
    double dist;
    double neg_mass;
    std::size_t o, r;
  };
  std::vector<Pair> pairs;
  const double r2 = match_radius * match_radius;
  for (const auto& a : orig.halos) {
    for (const auto& b : recon.halos) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) d2 += (a.centroid[k] - b.centroid[k]) * (a.centroid[k] - b.centroid[k]);
      if (d2 <= r2) pairs.push_back({std::sqrt(d2), -a.mass, a.id, b.id});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.dist, x.neg_mass, x.o, x.r) < std::tie(y.dist, y.neg_mass, y.o, y.r);
  });
  std::vector<bool> used_o(orig.halos.size(), false), used_r(recon.halos.size(), false);
  for (const auto& p : pairs) {
    if (used_o[p.o] || used_r[p.r]) continue;
    used_o[p.o] = used_r[p.r] = true;
    const auto& a = orig.halos[p.o];
    const auto& b = recon.halos[p.r];
    HaloMatch m;
    m.orig_id = a.id;
    m.recon_id = b.id;
    m.displacement = p.dist;
    m.mass_ratio = b.mass / a.mass;
    m.cell_delta = static_cast<long long>(b.cell_count) - static_cast<long long>(a.cell_count);
    m.mass_delta = b.mass - a.mass;
    m.mass_per_changed_cell = m.cell_delta != 0 ? std::fabs(m.mass_delta) / std::fabs(static_cast<double>(m.cell_delta))
                                                : std::numeric_limits<double>::quiet_NaN();
    cmp.matches.push_back(m);
  }
  std::sort(cmp.matches.begin(), cmp.matches.end(),
            [](const HaloMatch& x, const HaloMatch& y) { return x.orig_id < y.orig_id; });
  for (std::size_t i = 0; i < orig.halos.size(); ++i) {
    if (!used_o[i]) cmp.unmatched_orig.push_back(i);
  }
  for (std::size_t i = 0; i < recon.halos.size(); ++i) {
    if (!used_r[i]) cmp.unmatched_recon.push_back(i);
  }

  double sq = 0.0, rel = 0.0, disp = 0.0;
  std::size_t counted = 0;
  for (const auto& m : cmp.matches) {
    disp += m.displacement;
    cmp.max_displacement = std::max(cmp.max_displacement, m.displacement);
    cmp.total_abs_mass_change += std::fabs(m.mass_delta);
    if (orig.halos[m.orig_id].cell_count >= min_cells) {
      sq += m.mass_ratio * m.mass_ratio;
      rel += (m.mass_ratio - 1.0) * (m.mass_ratio - 1.0);
      ++counted;
    }
  }
  if (!cmp.matches.empty()) cmp.mean_displacement = disp / static_cast<double>(cmp.matches.size());
  if (counted) {
    cmp.mass_ratio_rms = std::sqrt(sq / static_cast<double>(counted));
    cmp.mass_rel_rmse = std::sqrt(rel / static_cast<double>(counted));
  }
  return cmp;
}

void write_catalog_csv(std::ostream& out, const HaloCatalog& catalog) {
  const auto old = out.precision(17);
  out << "id,cell_count,mass,cx,cy,cz,peak\n";
  for (const auto& h : catalog.halos) {
    out << h.id << ',' << h.cell_count << ',' << h.mass << ',' << h.centroid[0] << ',' << h.centroid[1] << ','
        << h.centroid[2] << ',' << h.peak << '\n';
  }
  out.precision(old);
}

void write_comparison_csv(std::ostream& out, const HaloCatalog& orig, const HaloCatalog& recon,
                          const CatalogComparison& cmp) {
  const auto old = out.precision(17);
  out << "# halos_orig=" << orig.halos.size() << '\n'
      << "# halos_recon=" << recon.halos.size() << '\n'
      << "# matched=" << cmp.matches.size() << '\n'
      << "# unmatched_orig=" << cmp.unmatched_orig.size() << '\n'
      << "# unmatched_recon=" << cmp.unmatched_recon.size() << '\n'
      << "# match_radius=" << cmp.match_radius << '\n'
      << "# min_cells=" << cmp.min_cells << '\n'
      << "# mean_displacement=" << cmp.mean_displacement << '\n'
      << "# max_displacement=" << cmp.max_displacement << '\n'
      << "# mass_ratio_rms=" << cmp.mass_ratio_rms << '\n'
      << "# mass_rel_rmse=" << cmp.mass_rel_rmse << '\n'
      << "# total_abs_mass_change=" << cmp.total_abs_mass_change << '\n';
  out << "orig_id,recon_id,orig_cells,recon_cells,orig_mass,recon_mass,displacement,mass_ratio,"
         "mass_per_changed_cell\n";
  for (const auto& m : cmp.matches) {
    const auto& a = orig.halos[m.orig_id];
    const auto& b = recon.halos[m.recon_id];
    out << m.orig_id << ',' << m.recon_id << ',' << a.cell_count << ',' << b.cell_count << ',' << a.mass << ','
        << b.mass << ',' << m.displacement << ',' << m.mass_ratio << ',';
    if (std::isnan(m.mass_per_changed_cell)) out << "nan"; else out << m.mass_per_changed_cell;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace adeb
