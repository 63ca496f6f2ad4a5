#include "adeb/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "adeb/error.hpp"
#include "adeb/halo.hpp"
#include "adeb/spectrum.hpp"

namespace adeb {

namespace {

constexpr int kBisectionSteps = 200;

std::size_t total_cells(std::span<const PartitionFeatures> features) {
  std::size_t n = 0;
  for (const auto& f : features) n += f.cell_count;
  return n;
}

void require_model(const PlanInputs& in) {
  if (in.features.empty()) throw ArgumentError("planner needs at least one partition");
  if (!in.model) throw ArgumentError("planner needs a calibrated rate model");
  if (!(in.model->c < 0.0)) throw ArgumentError("rate model exponent c must be negative");
}

// Finds x in [lo, hi] (log-spaced) with f(x) ~ target for a monotone f.
double log_bisect(double lo, double hi, const std::function<bool(double)>& go_up) {
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < kBisectionSteps && b - a > 1e-15; ++i) {
    const double mid = 0.5 * (a + b);
    if (go_up(std::exp(mid))) a = mid; else b = mid;
  }
  return std::exp(b);
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::uniform: return "uniform";
    case Strategy::fft: return "fft";
    case Strategy::halo: return "halo";
    case Strategy::combined: return "combined";
  }
  return "uniform";
}

Strategy strategy_from_string(std::string_view name) {
  for (auto s : {Strategy::uniform, Strategy::fft, Strategy::halo, Strategy::combined}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown strategy '" + std::string(name) + "'");
}

double CompressionPlan::mean_eb() const { return ebs.empty() ? 0.0 : mean_of(ebs); }

std::vector<double> partition_coefficients(const PlanInputs& in) {
  if (!in.coefficients.empty()) {
    if (in.coefficients.size() != in.features.size()) throw ArgumentError("probe coefficients not aligned");
    return {in.coefficients.begin(), in.coefficients.end()};
  }
  std::vector<double> C;
  C.reserve(in.features.size());
  for (const auto& f : in.features) C.push_back(estimate_C(f.mean, *in.model));
  return C;
}

double equal_bitrate_bound(double C_m, double C_a, double c, double eb_avg) {
  return eb_avg * std::exp(std::log(C_m / C_a) / c);
}

double marginal_cost(double C, double eb, double c) { return std::fabs(c) * C * std::pow(eb, c - 1.0); }

void annotate_plan(CompressionPlan& plan, const PlanInputs& in) {
  if (plan.ebs.size() != in.features.size()) throw ArgumentError("plan length does not match partition count");
  const auto cells = total_cells(in.features);
  plan.predicted_sigma3d = predict_fft_sigma(plan.ebs, cells).sigma_3d;
  plan.predicted_mass_fault = predict_fault(in.features, plan.ebs, in.t_boundary).mass_fault;
  if (!in.model) return;
  plan.coefficients = partition_coefficients(in);
  plan.predicted_bitrates.resize(plan.ebs.size());
  std::vector<PartitionRate> rates;
  for (std::size_t m = 0; m < plan.ebs.size(); ++m) {
    plan.predicted_bitrates[m] = plan.coefficients[m] * std::pow(plan.ebs[m], in.model->c);
    rates.push_back({plan.coefficients[m], plan.ebs[m], in.features[m].cell_count});
  }
  plan.predicted_bitrate = predict_dataset_bitrate(rates, in.model->c);
}

CompressionPlan plan_uniform(double eb, std::size_t partitions) {
  if (!(eb > 0.0)) throw ArgumentError("uniform error bound must be positive");
  if (partitions == 0) throw ArgumentError("plan needs at least one partition");
  CompressionPlan plan;
  plan.strategy = Strategy::uniform;
  plan.eb_avg = eb;
  plan.ebs.assign(partitions, eb);
  return plan;
}

CompressionPlan plan_uniform(const PlanInputs& in, double eb) {
  auto plan = plan_uniform(eb, in.features.size());
  annotate_plan(plan, in);
  return plan;
}

CompressionPlan plan_fft(const PlanInputs& in, double eb_avg) {
  require_model(in);
  if (!(eb_avg > 0.0)) throw ArgumentError("eb_avg must be positive");
  const auto M = in.features.size();
  const double c = in.model->c;
  const auto C = partition_coefficients(in);
  const double C_a = estimate_C(global_mean(in.features), *in.model);
  const double cells = static_cast<double>(total_cells(in.features));

  // Stationarity of sum w_m C_m eb_m^c under a fixed mean gives
  // eb_m proportional to (w_m C_m)^(1 / (1 - c)); scaled relative to C_a.
  std::vector<double> raw(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double weight = static_cast<double>(in.features[m].cell_count) * static_cast<double>(M) / cells;
    raw[m] = eb_avg * std::pow(weight * C[m] / C_a, 1.0 / (1.0 - c));
  }
  const double lo = eb_avg / kClampFactor, hi = eb_avg * kClampFactor;
  auto clamped_mean = [&](double scale) {
    double s = 0.0;
    for (double r : raw) s += std::clamp(scale * r, lo, hi);
    return s / static_cast<double>(M);
  };

  double scale = 1.0;
  if (clamped_mean(1.0) != eb_avg) {
    const auto [rmin, rmax] = std::minmax_element(raw.begin(), raw.end());
    scale = log_bisect(lo / *rmax, hi / *rmin, [&](double s) { return clamped_mean(s) < eb_avg; });
  }

  CompressionPlan plan;
  plan.strategy = Strategy::fft;
  plan.eb_avg = eb_avg;
  plan.ebs.resize(M);
  // Exact rescale of the free partitions so the mean lands on the budget.
  double fixed = 0.0, free_raw = 0.0;
  std::vector<bool> free(M, false);
  for (std::size_t m = 0; m < M; ++m) {
    const double v = scale * raw[m];
    if (v <= lo || v >= hi) {
      plan.ebs[m] = std::clamp(v, lo, hi);
      fixed += plan.ebs[m];
      ++plan.clamp_events;
    } else {
      free[m] = true;
      free_raw += raw[m];
    }
  }
  if (free_raw > 0.0) {
    const double exact = (static_cast<double>(M) * eb_avg - fixed) / free_raw;
    for (std::size_t m = 0; m < M; ++m) {
      if (free[m]) plan.ebs[m] = std::clamp(exact * raw[m], lo, hi);
    }
  }
  // Rounding may leave the mean a few ulps high; pull the largest bounds in.
  for (int pass = 0; pass < 4 && plan.mean_eb() > eb_avg; ++pass) {
    const double excess = (plan.mean_eb() - eb_avg) * static_cast<double>(M);
    auto it = std::max_element(plan.ebs.begin(), plan.ebs.end());
    *it = std::max(lo, *it - excess * (1.0 + 1e-12));
  }
  if (plan.mean_eb() > eb_avg * (1.0 + 1e-9)) {
    throw InfeasibleError("no clamped bound vector meets mean eb " + std::to_string(eb_avg));
  }
  annotate_plan(plan, in);
  return plan;
}

CompressionPlan plan_halo(const PlanInputs& in, double mass_fault_budget, double reference_eb) {
  require_model(in);
  if (!(mass_fault_budget > 0.0)) throw ArgumentError("mass fault budget must be positive");
  const auto M = in.features.size();
  const double c = in.model->c;
  const double tb = in.t_boundary;
  const auto C = partition_coefficients(in);
  const double cells = static_cast<double>(total_cells(in.features));

  double n_total = 0.0;
  for (const auto& f : in.features) n_total += f.n_ref;
  if (!(n_total > 0.0)) throw ArgumentError("plan_halo needs at least one partition with boundary cells");

  const double ref = reference_eb > 0.0 ? reference_eb : 4.0 * mass_fault_budget / (tb * n_total);
  const double lo = ref / kClampFactor, hi = ref * kClampFactor;

  auto fault_of = [&](std::span<const double> ebs) {
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m) s += in.features[m].n_ref * ebs[m];
    return tb * s / 4.0;
  };
  // Stationarity: w_m c C_m eb^(c-1) + lambda * tb * n_m / 4 = 0.
  std::vector<double> ebs(M);
  auto fill = [&](double lambda) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& f = in.features[m];
      if (f.n_ref <= 0.0) {
        ebs[m] = hi;
        continue;
      }
      const double w = static_cast<double>(f.cell_count) / cells;
      const double unconstrained = std::pow(-c * w * C[m] * 4.0 / (lambda * tb * f.n_ref), 1.0 / (1.0 - c));
      ebs[m] = std::clamp(unconstrained, lo, hi);
    }
  };

  CompressionPlan plan;
  plan.strategy = Strategy::halo;
  plan.eb_avg = ref;

  std::vector<double> all_lo(M, lo);
  for (std::size_t m = 0; m < M; ++m) {
    if (in.features[m].n_ref <= 0.0) all_lo[m] = hi;
  }
  if (fault_of(all_lo) > mass_fault_budget) {
    throw InfeasibleError("mass fault budget " + std::to_string(mass_fault_budget) +
                          " is unreachable even at the lowest clamped bounds");
  }
  std::vector<double> all_hi(M, hi);
  if (fault_of(all_hi) <= mass_fault_budget) {
    plan.ebs = all_hi;
  } else {
    // lambda range: every partition at hi .. every partition at lo.
    double lam_lo = INFINITY, lam_hi = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const auto& f = in.features[m];
      if (f.n_ref <= 0.0) continue;
      const double w = static_cast<double>(f.cell_count) / cells;
      const double k = -c * w * C[m] * 4.0 / (tb * f.n_ref);
      lam_lo = std::min(lam_lo, k / std::pow(hi, 1.0 - c));
      lam_hi = std::max(lam_hi, k / std::pow(lo, 1.0 - c));
    }
    const double lambda =
        log_bisect(lam_lo * 0.5, lam_hi * 2.0, [&](double lam) {
          fill(lam);
          return fault_of(ebs) > mass_fault_budget;
        });
    fill(lambda);
    plan.ebs = ebs;
  }
  for (double eb : plan.ebs) {
    if (eb <= lo * (1.0 + 1e-12) || eb >= hi * (1.0 - 1e-12)) ++plan.clamp_events;
  }
  annotate_plan(plan, in);
  if (plan.predicted_mass_fault > mass_fault_budget * (1.0 + 1e-9)) {
    throw InfeasibleError("halo plan failed to meet its mass fault budget");
  }
  return plan;
}

CompressionPlan plan_combined(const PlanInputs& in, double eb_avg, double mass_fault_budget) {
  if (!(mass_fault_budget > 0.0)) throw ArgumentError("mass fault budget must be positive");
  auto fft = plan_fft(in, eb_avg);
  if (fft.predicted_mass_fault <= mass_fault_budget) return fft;

  const auto halo = plan_halo(in, mass_fault_budget, eb_avg);
  CompressionPlan plan;
  plan.strategy = Strategy::combined;
  plan.eb_avg = eb_avg;
  plan.ebs.resize(fft.ebs.size());
  const double lo = eb_avg / kClampFactor, hi = eb_avg * kClampFactor;
  for (std::size_t m = 0; m < plan.ebs.size(); ++m) {
    plan.ebs[m] = std::min(fft.ebs[m], halo.ebs[m]);
    if (plan.ebs[m] <= lo * (1.0 + 1e-12) || plan.ebs[m] >= hi * (1.0 - 1e-12)) ++plan.clamp_events;
  }
  annotate_plan(plan, in);
  return plan;
}

void write_plan_csv(std::ostream& out, const CompressionPlan& plan) {
  const auto old = out.precision(17);
  out << "# strategy=" << to_string(plan.strategy) << '\n'
      << "# partitions=" << plan.ebs.size() << '\n'
      << "# eb_avg=" << plan.eb_avg << '\n'
      << "# mean_eb=" << plan.mean_eb() << '\n'
      << "# predicted_bitrate=" << plan.predicted_bitrate << '\n'
      << "# predicted_ratio=" << plan.predicted_ratio() << '\n'
      << "# predicted_sigma3d=" << plan.predicted_sigma3d << '\n'
      << "# predicted_mass_fault=" << plan.predicted_mass_fault << '\n'
      << "# clamp_events=" << plan.clamp_events << '\n';
  out << "partition_id,eb,predicted_bitrate\n";
  for (std::size_t m = 0; m < plan.ebs.size(); ++m) {
    out << m << ',' << plan.ebs[m] << ',';
    if (m < plan.predicted_bitrates.size()) out << plan.predicted_bitrates[m]; else out << "nan";
    out << '\n';
  }
  out.precision(old);
}

CompressionPlan read_plan_csv(std::istream& in) {
  CompressionPlan plan;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      const auto value = line.substr(eq + 1);
      try {
        if (key == "strategy") plan.strategy = strategy_from_string(value);
        else if (key == "eb_avg") plan.eb_avg = std::stod(value);
        else if (key == "predicted_bitrate") plan.predicted_bitrate = std::stod(value);
        else if (key == "predicted_sigma3d") plan.predicted_sigma3d = std::stod(value);
        else if (key == "predicted_mass_fault") plan.predicted_mass_fault = std::stod(value);
        else if (key == "clamp_events") plan.clamp_events = std::stoul(value);
      } catch (const std::invalid_argument&) {
        throw FormatError("bad plan summary line: " + line);
      }
      continue;
    }
    if (!header) {
      if (line.rfind("partition_id,eb", 0) != 0) throw FormatError("plan CSV is missing its header row");
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string id, eb, bitrate;
    std::getline(row, id, ',');
    std::getline(row, eb, ',');
    std::getline(row, bitrate, ',');
    try {
      if (std::stoul(id) != plan.ebs.size()) throw FormatError("plan rows must be in partition order");
      const double e = std::stod(eb);
      if (!(e > 0.0)) throw FormatError("plan error bounds must be positive");
      plan.ebs.push_back(e);
      if (!bitrate.empty() && bitrate != "nan") plan.predicted_bitrates.push_back(std::stod(bitrate));
    } catch (const std::invalid_argument&) {
      throw FormatError("bad plan row: " + line);
    } catch (const std::out_of_range&) {
      throw FormatError("bad plan row: " + line);
    }
  }
  if (plan.ebs.empty()) throw FormatError("plan CSV has no partition rows");
  if (!plan.predicted_bitrates.empty() && plan.predicted_bitrates.size() != plan.ebs.size()) {
    plan.predicted_bitrates.clear();
  }
  return plan;
}

void save_plan(const CompressionPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_plan_csv(out, plan);
  if (!out) throw IoError("write failure on '" + path + "'");
}

CompressionPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_plan_csv(in);
}

}  // namespace adeb
