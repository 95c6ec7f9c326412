#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rffqrng/event_source.hpp"
#include "rffqrng/io.hpp"
#include "rffqrng/sts/special_functions.hpp"

using namespace rffqrng;

namespace {

std::vector<double> gaps(const DetectionTimes& d) {
  std::vector<double> g;
  g.reserve(d.size());
  g.push_back(d.times.front());
  for (std::size_t i = 1; i < d.size(); ++i) g.push_back(d.times[i] - d.times[i - 1]);
  return g;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(UnderlyingArrivalRate, NoDeadTimeIsIdentity) {
  EXPECT_DOUBLE_EQ(underlying_arrival_rate({45e6, 0.0, 1}), 45e6);
}

TEST(UnderlyingArrivalRate, InvertsNonParalyzableLoss) {
  const double r = underlying_arrival_rate({45e6, 6e-9, 1});
  EXPECT_NEAR(r, 61.643835616e6, 1.0);
  EXPECT_NEAR(r / (1.0 + r * 6e-9), 45e6, 1e-6);
}

TEST(UnderlyingArrivalRate, RejectsInfeasibleRates) {
  for (const DetectorConfig& bad : {DetectorConfig{200e6, 6e-9, 1}, DetectorConfig{0.0, 0.0, 1},
                                    DetectorConfig{-1.0, 0.0, 1}, DetectorConfig{1e9, 1e-9, 1}}) {
    try {
      underlying_arrival_rate(bad);
      FAIL() << "expected InvalidConfig";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
  }
}

TEST(GenerateDetections, MeanWaitingTimeWithoutDeadTime) {
  const auto d = generate_detections({45e6, 0.0, 3}, 1'000'000);
  const double expected = 1.0 / 45e6;
  EXPECT_NEAR(mean(gaps(d)), expected, 4.0 * expected / 1000.0);
}

TEST(GenerateDetections, DeadTimeFloorAndMeanGap) {
  const auto d = generate_detections({45e6, 6e-9, 4}, 1'000'000);
  const auto g = gaps(d);
  // the first gap is measured from t = 0 where the detector is live
  EXPECT_GE(*std::min_element(g.begin() + 1, g.end()), 6e-9);
  const double expected = 1.0 / 45e6;
  EXPECT_NEAR(mean(g), expected, 4.0 * expected / 1000.0);
  EXPECT_DOUBLE_EQ(d.dead_time, 6e-9);
}

TEST(GenerateDetections, StrictlyIncreasing) {
  const auto d = generate_detections({80e6, 6e-9, 5}, 200'000);
  for (std::size_t i = 1; i < d.size(); ++i) ASSERT_GT(d.times[i], d.times[i - 1]);
  EXPECT_DOUBLE_EQ(d.span, d.times.back());
}

TEST(GenerateDetections, DeterministicPerSeedAndDistinctAcrossSeeds) {
  const auto a = generate_detections({45e6, 6e-9, 42}, 5000);
  const auto b = generate_detections({45e6, 6e-9, 42}, 5000);
  EXPECT_EQ(a.times, b.times);

  const auto c = generate_detections({45e6, 6e-9, 43}, 1000);
  const auto s = generate_detections({45e6, 6e-9, 42, 1}, 1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_NE(a.times[i], c.times[i]);
    EXPECT_NE(a.times[i], s.times[i]);
  }
}

TEST(GenerateDetections, RejectsZeroEvents) {
  EXPECT_THROW(generate_detections({45e6, 0.0, 1}, 0), Error);
}

TEST(GenerateDetections, RateConvergesWithDeadTime) {
  for (double tau : {2e-9, 6e-9, 10e-9}) {
    const auto d = generate_detections({45e6, tau, 17}, 1'000'000);
    const double measured = static_cast<double>(d.size()) / d.span;
    EXPECT_NEAR(measured / 45e6, 1.0, 0.01) << "tau=" << tau;
  }
}

TEST(GenerateDetections, WaitingTimesPassKsAgainstExponential) {
  const double rate = 45e6;
  int passes = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto d = generate_detections({rate, 0.0, 1000 + run}, 100'000);
    const auto ks = sts::ks_test(gaps(d), [&](double t) { return t <= 0 ? 0.0 : -std::expm1(-rate * t); });
    if (ks.p_value >= 0.01) ++passes;
  }
  EXPECT_GE(passes, 95);
}

TEST(WaitingTimeHistogram, FitRecoversRate) {
  const auto d = generate_detections({45e6, 0.0, 8}, 10'000'000);
  const auto h = waiting_time_histogram(d, 1e-9);
  ASSERT_TRUE(h.fitted_rate.has_value());
  EXPECT_NEAR(*h.fitted_rate / 45e6, 1.0, 0.02);
}

TEST(WaitingTimeHistogram, DeadTimeBinsEmpty) {
  const auto d = generate_detections({45e6, 6e-9, 9}, 1'000'000);
  const auto h = waiting_time_histogram(d, 0.5e-9);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(h.counts[i], 0U) << "bin " << i;
  EXPECT_GT(h.counts[12], 0U);
  // the exponential tail above the dead time decays at the underlying arrival rate
  ASSERT_TRUE(h.fitted_rate.has_value());
  EXPECT_NEAR(*h.fitted_rate / underlying_arrival_rate({45e6, 6e-9, 9}), 1.0, 0.03);
}

TEST(WaitingTimeHistogram, Errors) {
  const auto one = generate_detections({45e6, 0.0, 1}, 1);
  try {
    waiting_time_histogram(one, 1e-9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewEvents);
  }
  const auto two = generate_detections({45e6, 0.0, 1}, 2);
  EXPECT_THROW(waiting_time_histogram(two, 0.0), Error);
}

TEST(DetectionExport, LittleEndianPicosecondsWithSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "rffqrng_event_export";
  std::filesystem::create_directories(dir);
  const auto path = dir / "det.bin";
  const DetectorConfig cfg{45e6, 6e-9, 77};
  const auto d = generate_detections(cfg, 1000);
  io::write_detections(path, d, cfg);

  EXPECT_EQ(std::filesystem::file_size(path), 8000U);
  const auto ps = io::read_detections_ps(path);
  ASSERT_EQ(ps.size(), 1000U);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(ps[i], static_cast<std::uint64_t>(std::llround(d.times[i] * 1e12)));
  }
  const auto raw = io::read_file(path);
  EXPECT_EQ(raw[0], static_cast<std::uint8_t>(ps[0] & 0xff));

  const auto meta = io::read_json(io::sidecar_path(path));
  EXPECT_EQ(meta.at("count").get<std::size_t>(), 1000U);
  EXPECT_EQ(meta.at("seed").get<std::uint64_t>(), 77U);
  EXPECT_DOUBLE_EQ(meta.at("rate").get<double>(), 45e6);
  EXPECT_DOUBLE_EQ(meta.at("dead_time").get<double>(), 6e-9);
  std::filesystem::remove_all(dir);
}
