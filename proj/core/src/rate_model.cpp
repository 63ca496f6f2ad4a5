#include "adeb/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adeb/bytes.hpp"
#include "adeb/codec.hpp"
#include "adeb/error.hpp"

namespace adeb {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return {0.0, my};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

double PowerLawFit::coefficient() const { return std::exp(intercept); }

PowerLawFit fit_power_law(std::span<const double> ebs, std::span<const double> bitrates) {
  if (ebs.size() != bitrates.size() || ebs.size() < 2) throw ArgumentError("power-law fit needs >= 2 paired points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ebs.size(); ++i) {
    if (!(ebs[i] > 0.0) || !(bitrates[i] > 0.0)) throw ArgumentError("power-law fit needs positive values");
    lx.push_back(std::log(ebs[i]));
    ly.push_back(std::log(bitrates[i]));
  }
  const auto f = least_squares(lx, ly);
  return {f.slope, f.intercept};
}

RateModel fit_rate_model(std::span<const RateCurve> curves, double valid_bitrate_max) {
  RateModel model;
  model.valid_bitrate_max = valid_bitrate_max;

  struct Usable {
    const RateCurve* curve;
    std::vector<double> ebs, bitrates;
    double slope;
  };
  std::vector<Usable> usable;
  for (const auto& curve : curves) {
    Usable u{&curve, {}, {}, 0.0};
    for (std::size_t i = 0; i < curve.ebs.size(); ++i) {
      if (curve.bitrates[i] > 0.0 && curve.bitrates[i] < valid_bitrate_max) {
        u.ebs.push_back(curve.ebs[i]);
        u.bitrates.push_back(curve.bitrates[i]);
      }
    }
    if (u.ebs.size() < 3) {
      model.report.excluded.push_back(curve.partition_id);
      continue;
    }
    u.slope = fit_power_law(u.ebs, u.bitrates).slope;
    usable.push_back(std::move(u));
  }
  if (usable.empty()) throw CalibrationError("no partition has 3 grid points below the valid bitrate");

  std::vector<double> slopes;
  for (const auto& u : usable) slopes.push_back(u.slope);
  model.c = median(slopes);
  if (!(model.c < 0.0)) {
    throw CalibrationError("fitted exponent c = " + std::to_string(model.c) + " is not negative");
  }

  std::vector<double> log_means, coefs;
  double c_min = INFINITY;
  for (const auto& u : usable) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.ebs.size(); ++i) acc += std::log(u.bitrates[i]) - model.c * std::log(u.ebs[i]);
    const double C = std::exp(acc / static_cast<double>(u.ebs.size()));
    c_min = std::min(c_min, C);
    log_means.push_back(std::log(u.curve->mean + kMeanEpsilon));
    coefs.push_back(C);
    model.report.points.push_back({u.curve->partition_id, u.curve->mean, u.slope, C, 0.0, u.ebs.size()});
  }
  const auto fit = least_squares(log_means, coefs);
  model.fit_alpha = fit.slope;
  model.fit_beta = fit.intercept;
  model.c_floor = c_min / 4.0;

  std::vector<double> rel;
  for (auto& p : model.report.points) {
    p.fitted = estimate_C(p.mean, model);
    rel.push_back(std::fabs(p.fitted - p.coefficient) / p.coefficient);
  }
  model.report.max_rel_residual = *std::max_element(rel.begin(), rel.end());
  model.report.median_rel_residual = median(rel);
  return model;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw ArgumentError("log_grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

std::vector<RateCurve> measure_rate_curves(const PartitionSet& pset, const Field3D& field,
                                           const CalibrationOptions& options) {
  const auto& grid = options.eb_grid;
  if (grid.size() < 3) throw ArgumentError("calibration grid needs at least 3 error bounds");
  if (options.sample_stride < 1) throw ArgumentError("sample_stride must be >= 1");
  for (double eb : grid) {
    if (!(eb > 0.0)) throw ArgumentError("calibration error bounds must be positive");
  }
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  if (*hi / *lo < 10.0 * (1.0 - 1e-12)) throw ArgumentError("calibration grid must span at least one decade");

  const auto features = extract_features(pset, field);
  std::vector<std::size_t> sampled;
  for (std::size_t id = 0; id < pset.count(); id += options.sample_stride) sampled.push_back(id);

  std::vector<RateCurve> curves(sampled.size());
  const auto jobs = sampled.size() * grid.size();
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    curves[i] = {sampled[i], features[sampled[i]].mean, grid, std::vector<double>(grid.size())};
  }
  std::vector<std::vector<float>> blocks(sampled.size());
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    blocks[i] = extract_block(field.values(), field.dims(), pset.blocks[sampled[i]]);
  }
  for_each_block(jobs, options.threads, [&](std::size_t job) {
    const auto i = job / grid.size();
    const auto g = job % grid.size();
    const auto block = compress_block(blocks[i], pset.blocks[sampled[i]].extent, grid[g]);
    curves[i].bitrates[g] = measure_bitrate(block);
  });
  return curves;
}

RateModel calibrate(const PartitionSet& pset, const Field3D& field, const CalibrationOptions& options) {
  const auto curves = measure_rate_curves(pset, field, options);
  return fit_rate_model(curves, options.valid_bitrate_max);
}

double estimate_C(double mean, const RateModel& model) {
  if (!(mean >= 0.0)) throw ArgumentError("estimate_C needs a non-negative mean");
  const double C = model.fit_alpha * std::log(mean + kMeanEpsilon) + model.fit_beta;
  return std::max(C, model.c_floor);
}

BitratePrediction predict_bitrate(double C, double eb, const RateModel& model) {
  if (!(eb > 0.0) || !(C > 0.0)) throw ArgumentError("predict_bitrate needs C > 0 and eb > 0");
  const double b = C * std::pow(eb, model.c);
  return {b, b > model.valid_bitrate_max};
}

double predict_dataset_bitrate(std::span<const PartitionRate> plan, double c) {
  if (plan.empty()) throw ArgumentError("empty plan");
  double bits = 0.0;
  std::size_t cells = 0;
  for (const auto& p : plan) {
    if (!(p.eb > 0.0)) throw ArgumentError("plan error bounds must be positive");
    bits += static_cast<double>(p.cells) * p.C * std::pow(p.eb, c);
    cells += p.cells;
  }
  return bits / static_cast<double>(cells);
}

double probe_C(std::span<const float> block, const Dims3& dims, double eb_ref, double c) {
  const auto compressed = compress_block(block, dims, eb_ref);
  return measure_bitrate(compressed) / std::pow(eb_ref, c);
}

std::string to_json(const RateModel& model) {
  nlohmann::json j;
  j["c"] = model.c;
  j["fit_alpha"] = model.fit_alpha;
  j["fit_beta"] = model.fit_beta;
  j["valid_bitrate_max"] = model.valid_bitrate_max;
  j["c_floor"] = model.c_floor;
  auto& r = j["residuals"];
  r["max_rel"] = model.report.max_rel_residual;
  r["median_rel"] = model.report.median_rel_residual;
  r["excluded"] = model.report.excluded;
  r["points"] = nlohmann::json::array();
  for (const auto& p : model.report.points) {
    r["points"].push_back({{"partition_id", p.partition_id},
                           {"mean", p.mean},
                           {"slope", p.slope},
                           {"C", p.coefficient},
                           {"C_fit", p.fitted},
                           {"points_used", p.points_used}});
  }
  return j.dump(2) + "\n";
}

RateModel rate_model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RateModel m;
    m.c = j.at("c").get<double>();
    m.fit_alpha = j.at("fit_alpha").get<double>();
    m.fit_beta = j.at("fit_beta").get<double>();
    m.valid_bitrate_max = j.value("valid_bitrate_max", 2.0);
    m.c_floor = j.value("c_floor", 0.0);
    if (j.contains("residuals")) {
      const auto& r = j["residuals"];
      m.report.max_rel_residual = r.value("max_rel", 0.0);
      m.report.median_rel_residual = r.value("median_rel", 0.0);
      if (r.contains("excluded")) m.report.excluded = r["excluded"].get<std::vector<std::size_t>>();
      if (r.contains("points")) {
        for (const auto& p : r["points"]) {
          m.report.points.push_back({p.at("partition_id").get<std::size_t>(), p.at("mean").get<double>(),
                                     p.at("slope").get<double>(), p.at("C").get<double>(),
                                     p.at("C_fit").get<double>(), p.at("points_used").get<std::size_t>()});
        }
      }
    }
    if (!(m.c < 0.0)) throw FormatError("rate model exponent c must be negative");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid rate model document: ") + e.what());
  }
}

void save_rate_model(const RateModel& model, const std::string& path) {
  const auto text = to_json(model);
  bytes::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RateModel load_rate_model(const std::string& path) {
  const auto data = bytes::read_file(path);
  return rate_model_from_json(std::string(data.begin(), data.end()));
}

}  // namespace adeb
