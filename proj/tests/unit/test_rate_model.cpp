#include <adeb/codec.hpp>
#include <adeb/error.hpp>
#include <adeb/rate_model.hpp>
#include <adeb/synth.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace adeb;

namespace {

RateCurve power_curve(std::size_t id, double mean, double C, double c, std::vector<double> ebs) {
  RateCurve r{id, mean, ebs, {}};
  for (double eb : ebs) r.bitrates.push_back(C * std::pow(eb, c));
  return r;
}

}  // namespace

TEST(PowerLaw, ExactOnNoiselessSeries) {
  std::vector<double> ebs{0.8, 1.0, 2.0, 3.5, 6.0, 10.0};
  std::vector<double> b;
  for (double e : ebs) b.push_back(1.5 * std::pow(e, -0.8));
  auto fit = fit_power_law(ebs, b);
  EXPECT_NEAR(fit.slope, -0.8, 1e-9);
  EXPECT_NEAR(fit.coefficient(), 1.5, 1e-9);
  EXPECT_THROW(fit_power_law(std::vector<double>{1.0}, std::vector<double>{1.0}), ArgumentError);
  EXPECT_THROW(fit_power_law(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}), ArgumentError);
}

TEST(RateModelFit, RecoversFabricatedModel) {
  std::vector<RateCurve> curves{power_curve(0, 3.0, 1.5, -0.8, {0.8, 1.0, 2.0, 4.0, 8.0, 10.0})};
  auto m = fit_rate_model(curves);
  EXPECT_NEAR(m.c, -0.8, 1e-9);
  ASSERT_EQ(m.report.points.size(), 1u);
  EXPECT_NEAR(m.report.points[0].coefficient, 1.5, 1e-9);
  EXPECT_NEAR(m.report.points[0].slope, -0.8, 1e-9);
}

TEST(RateModelFit, LogarithmicMeanMapIsRecovered) {
  // C(mu) = 0.3 ln mu + 1.2 exactly, shared exponent -1.1
  std::vector<RateCurve> curves;
  const std::vector<double> ebs{2.0, 4.0, 8.0, 16.0, 32.0};
  const double means[] = {5.0, 20.0, 80.0, 300.0, 1000.0};
  for (std::size_t i = 0; i < 5; ++i) {
    curves.push_back(power_curve(i, means[i], 0.3 * std::log(means[i]) + 1.2, -1.1, ebs));
  }
  auto m = fit_rate_model(curves);
  EXPECT_NEAR(m.c, -1.1, 1e-9);
  EXPECT_NEAR(m.fit_alpha, 0.3, 1e-9);
  EXPECT_NEAR(m.fit_beta, 1.2, 1e-9);
  EXPECT_LT(m.report.max_rel_residual, 1e-9);
  for (const auto& p : m.report.points) EXPECT_NEAR(estimate_C(p.mean, m), p.coefficient, 1e-9 * p.coefficient);
}

TEST(RateModelFit, ExponentIsMedianOfSlopes) {
  const std::vector<double> ebs{1.0, 2.0, 4.0, 10.0};
  std::vector<RateCurve> curves{power_curve(0, 1, 1.0, -0.5, ebs), power_curve(1, 2, 1.0, -0.9, ebs),
                                power_curve(2, 3, 1.0, -3.0, ebs)};
  auto m = fit_rate_model(curves);
  EXPECT_NEAR(m.c, -0.9, 1e-9);
}

TEST(RateModelFit, IgnoresPointsAtOrAboveValidMaximum) {
  // below eb = 1 this curve is above 2 bits and follows a different law
  RateCurve r = power_curve(0, 1.0, 1.8, -1.0, {0.1, 0.3, 1.0, 2.0, 5.0, 10.0});
  r.bitrates[0] = 40.0;
  r.bitrates[1] = 2.0;
  auto m = fit_rate_model(std::vector<RateCurve>{r});
  EXPECT_NEAR(m.c, -1.0, 1e-9);
  EXPECT_EQ(m.report.points[0].points_used, 4u);
}

TEST(RateModelFit, ExclusionAndFailure) {
  RateCurve good = power_curve(0, 1.0, 1.0, -1.0, {1.0, 2.0, 4.0, 8.0});
  RateCurve few = power_curve(4, 1.0, 1.0, -1.0, {0.1, 0.2, 1.0, 2.0});  // only two points below 2
  auto m = fit_rate_model(std::vector<RateCurve>{good, few});
  ASSERT_EQ(m.report.excluded.size(), 1u);
  EXPECT_EQ(m.report.excluded[0], 4u);
  EXPECT_THROW(fit_rate_model(std::vector<RateCurve>{few}), CalibrationError);
  // increasing bitrate with eb has no usable exponent
  RateCurve up = power_curve(0, 1.0, 0.1, 0.5, {1.0, 2.0, 4.0, 8.0});
  EXPECT_THROW(fit_rate_model(std::vector<RateCurve>{up}), CalibrationError);
}

TEST(RateModelCalibrate, IdenticalPartitionsFitIdentically) {
  // two copies of the same 16^3 block side by side
  auto src = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {16, 16, 16}), 3);
  std::vector<float> v(2 * src.size());
  Dims3 d{32, 16, 16};
  for (std::size_t x = 0; x < 32; ++x)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t z = 0; z < 16; ++z) v[d.index(x, y, z)] = src.at(x % 16, y, z);
  Field3D f("twin", Role::baryon_density, d, v);
  auto pset = partition_field(f, {16, 16, 16});
  CalibrationOptions opt;
  opt.eb_grid = log_grid(0.5, 50.0, 6);
  opt.sample_stride = 1;
  auto curves = measure_rate_curves(pset, f, opt);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].bitrates, curves[1].bitrates);
  // every grid point usable, so both partitions take part in the fit
  auto m = fit_rate_model(curves, 64.0);
  ASSERT_EQ(m.report.points.size(), 2u);
  EXPECT_EQ(m.report.points[0].slope, m.report.points[1].slope);
  EXPECT_EQ(m.report.points[0].coefficient, m.report.points[1].coefficient);
}

TEST(RateModelCalibrate, DeterministicAndThreadIndependent) {
  auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {64, 64, 64}), 4);
  auto pset = partition_field(f, {16, 16, 16});
  CalibrationOptions opt;
  opt.eb_grid = log_grid(0.1, 10.0, 6);
  opt.sample_stride = 4;
  auto a = measure_rate_curves(pset, f, opt);
  opt.threads = 4;
  auto b = measure_rate_curves(pset, f, opt);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].partition_id, i * 4);
    EXPECT_EQ(a[i].bitrates, b[i].bitrates);  // bit-exact
  }
  // every bitrate equals an independent compression of that block
  const auto blk = extract_block(f.values(), f.dims(), pset.blocks[8]);
  EXPECT_EQ(a[2].bitrates[3], measure_bitrate(compress_block(blk, pset.blocks[8].extent, opt.eb_grid[3])));
}

TEST(RateModelCalibrate, GridValidation) {
  auto f = generate_synthetic(SynthesisSpec::preset("smooth", Role::baryon_density, {16, 16, 16}), 1);
  auto pset = partition_field(f, {8, 8, 8});
  CalibrationOptions opt;
  opt.eb_grid = {1.0, 2.0};
  EXPECT_THROW(calibrate(pset, f, opt), ArgumentError);
  opt.eb_grid = {1.0, 2.0, 5.0};  // less than a decade
  EXPECT_THROW(calibrate(pset, f, opt), ArgumentError);
  opt.eb_grid = {1.0, 2.0, 10.0};
  opt.sample_stride = 0;
  EXPECT_THROW(calibrate(pset, f, opt), ArgumentError);
}

TEST(LogGrid, EndpointsAndSpacing) {
  auto g = log_grid(0.25, 4.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.25);
  EXPECT_DOUBLE_EQ(g.back(), 4.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], 2.0, 1e-12);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), ArgumentError);
}

TEST(EstimateC, DegenerateAndClamped) {
  RateModel m;
  m.c = -1.0;
  m.fit_alpha = 0.0;
  m.fit_beta = 0.7;
  for (double mu : {0.0, 1e-3, 1.0, 1e6}) EXPECT_DOUBLE_EQ(estimate_C(mu, m), 0.7);

  m.fit_alpha = 0.5;
  m.fit_beta = 0.0;
  m.c_floor = 0.05;
  EXPECT_DOUBLE_EQ(estimate_C(1e-6, m), 0.05);  // 0.5 ln(1e-6) < 0
  EXPECT_DOUBLE_EQ(estimate_C(0.0, m), 0.05);
  EXPECT_NEAR(estimate_C(std::exp(2.0), m), 1.0, 1e-12);
  EXPECT_THROW(estimate_C(-1.0, m), ArgumentError);
}

TEST(PredictBitrate, Arithmetic) {
  RateModel m;
  m.c = -1.0;
  auto p = predict_bitrate(1.0, 0.5, m);
  EXPECT_DOUBLE_EQ(p.bitrate, 2.0);
  EXPECT_FALSE(p.extrapolated);
  m.c = -0.73;
  EXPECT_DOUBLE_EQ(predict_bitrate(1.37, 1.0, m).bitrate, 1.37);
  EXPECT_TRUE(predict_bitrate(5.0, 0.5, m).extrapolated);
  EXPECT_THROW(predict_bitrate(0.0, 1.0, m), ArgumentError);
  EXPECT_THROW(predict_bitrate(1.0, 0.0, m), ArgumentError);
}

TEST(PredictBitrate, MonotoneDecreasingInBound) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-3.0, -0.05), C(0.01, 10.0), eb(1e-4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    RateModel m;
    m.c = c(rng);
    const double k = C(rng);
    const double a = eb(rng), b = eb(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    EXPECT_GE(predict_bitrate(k, lo, m).bitrate, predict_bitrate(k, hi, m).bitrate);
  }
}

TEST(DatasetBitrate, Examples) {
  std::vector<PartitionRate> same(10, PartitionRate{0.8, 2.0, 100});
  EXPECT_NEAR(predict_dataset_bitrate(same, -1.2), 0.8 * std::pow(2.0, -1.2), 1e-15);
  // b = C * eb^-1 with eb = 1: b = {1, 3}
  std::vector<PartitionRate> two{{1.0, 1.0, 64}, {3.0, 1.0, 64}};
  EXPECT_DOUBLE_EQ(predict_dataset_bitrate(two, -1.0), 2.0);
  std::vector<PartitionRate> weighted{{1.0, 1.0, 8}, {5.0, 1.0, 24}};
  EXPECT_DOUBLE_EQ(predict_dataset_bitrate(weighted, -1.0), 4.0);
  EXPECT_THROW(predict_dataset_bitrate(std::vector<PartitionRate>{}, -1.0), ArgumentError);
}

TEST(ProbeC, MatchesOneMeasurement) {
  auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {32, 32, 32}), 6);
  std::vector<float> v(f.values().begin(), f.values().end());
  const double b = measure_bitrate(compress_block(v, f.dims(), 2.0));
  EXPECT_NEAR(probe_C(v, f.dims(), 2.0, -0.9), b / std::pow(2.0, -0.9), 1e-12);
}

TEST(RateModelJson, RoundTripAndErrors) {
  std::vector<RateCurve> curves;
  for (std::size_t i = 0; i < 4; ++i)
    curves.push_back(power_curve(i, 10.0 * (i + 1), 0.5 + 0.1 * i, -0.9, {1.0, 2.0, 5.0, 10.0}));
  auto m = fit_rate_model(curves);
  auto back = rate_model_from_json(to_json(m));
  EXPECT_EQ(back.c, m.c);
  EXPECT_EQ(back.fit_alpha, m.fit_alpha);
  EXPECT_EQ(back.fit_beta, m.fit_beta);
  EXPECT_EQ(back.c_floor, m.c_floor);
  EXPECT_EQ(back.valid_bitrate_max, m.valid_bitrate_max);
  EXPECT_EQ(back.report.points.size(), m.report.points.size());
  EXPECT_EQ(back.report.max_rel_residual, m.report.max_rel_residual);

  oracle::TempDir tmp("rate");
  save_rate_model(m, (tmp / "m.json").string());
  EXPECT_EQ(load_rate_model((tmp / "m.json").string()).c, m.c);

  EXPECT_THROW(rate_model_from_json("{"), FormatError);
  EXPECT_THROW(rate_model_from_json(R"({"c": 0.5, "fit_alpha": 0, "fit_beta": 1})"), FormatError);
  EXPECT_THROW(rate_model_from_json(R"({"fit_alpha": 0, "fit_beta": 1})"), FormatError);
}

// A real calibration on codec output must produce a negative exponent and a
// C map that reproduces each calibrated partition within its own residual.
TEST(RateModelCalibrate, RealFieldSanity) {
  auto f = generate_synthetic(SynthesisSpec::preset("heterogeneous", Role::baryon_density, {64, 64, 64}), 2);
  auto pset = partition_field(f, {16, 16, 16});
  CalibrationOptions opt;
  opt.eb_grid = log_grid(0.5, 20.0, 8);
  opt.sample_stride = 2;
  auto m = calibrate(pset, f, opt);
  EXPECT_LT(m.c, 0.0);
  EXPECT_GT(m.c_floor, 0.0);
  for (const auto& p : m.report.points) {
    EXPECT_GT(estimate_C(p.mean, m), 0.0);
    EXPECT_DOUBLE_EQ(estimate_C(p.mean, m), p.fitted);
    EXPECT_LE(std::abs(p.fitted - p.coefficient) / p.coefficient, m.report.max_rel_residual + 1e-15);
  }
}
