#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "motionskill/kinematics.hpp"
#include "motionskill/synth.hpp"
#include "test_util.hpp"

using namespace motionskill;

namespace {

template <typename Fx, typename Fy>
ToolTrack sampled(Fx fx, Fy fy, int n, double fps, Tool tool = Tool::Left) {
  ToolTrack t{tool, {}, fps};
  for (int i = 0; i < n; ++i) {
    const double time = i / fps;
    t.samples.push_back({i, fx(time), fy(time)});
  }
  return t;
}

ToolTrack circle(double r, double omega, double fps, double seconds) {
  return sampled([&](double t) { return r * std::cos(omega * t); }, [&](double t) { return r * std::sin(omega * t); },
                 static_cast<int>(seconds * fps) + 1, fps);
}

ToolTrack transformed(const ToolTrack& t, double scale, double dx, double dy) {
  ToolTrack out = t;
  for (auto& s : out.samples) {
    s.x = scale * s.x + dx;
    s.y = scale * s.y + dy;
  }
  return out;
}

SegmentTracks segment_of(const ToolTrack& l, const ToolTrack& r) {
  ToolTrack right = r;
  right.tool = Tool::Right;
  return {l, right, false};
}

}  // namespace

TEST(Derivative, Examples) {
  const std::vector<double> ramp{0, 1, 2, 3, 4};
  EXPECT_EQ(derivative(ramp, 1.0), (std::vector<double>{1, 1, 1}));
  EXPECT_ERROR_KIND(derivative(std::vector<double>{1, 2}, 1.0), ErrorKind::SeriesTooShort);

  const double dt = 0.001;
  std::vector<double> s;
  for (int i = 0; i <= 3000; ++i) s.push_back(std::sin(i * dt));
  const auto d = derivative(s, 1.0 / dt);
  ASSERT_EQ(d.size(), s.size() - 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(d[i] - std::cos((i + 1) * dt)));
  EXPECT_LT(worst, 1e-5);
}

TEST(Rms, Examples) {
  EXPECT_NEAR(rms(std::vector<double>{3, 4}), std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(rms(std::vector<double>{3, 4}), 3.5355, 1e-4);
  EXPECT_EQ(rms(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_NEAR(rms(std::vector<double>(7, -2.5)), 2.5, 1e-12);
  EXPECT_ERROR_KIND(rms(std::vector<double>{}), ErrorKind::EmptySeries);
}

TEST(RmsKinematic, UniformMotion) {
  const auto t = sampled([](double s) { return s; }, [](double) { return 7.0; }, 20, 1.0);
  EXPECT_NEAR(rms_kinematic(t, 1), 1.0, 1e-12);
  EXPECT_NEAR(rms_kinematic(t, 2), 0.0, 1e-12);
  EXPECT_NEAR(rms_kinematic(t, 3), 0.0, 1e-12);
}

TEST(RmsKinematic, CircleSpeed) {
  const auto t = circle(100.0, 1.0, 200.0, 2 * std::numbers::pi);
  EXPECT_NEAR(rms_kinematic(t, 1), 100.0, 0.5);
  EXPECT_NEAR(rms_kinematic(t, 2), 100.0, 0.5);  // centripetal r w^2
  EXPECT_NEAR(rms_kinematic(t, 3), 100.0, 0.5);
}

TEST(RmsKinematic, CubicMatchesAnalyticJerk) {
  // x = 2 t^3 - t^2, y = -t^3 + 4 t: jerk (12, -6) everywhere.
  const auto t = sampled([](double s) { return 2 * s * s * s - s * s; }, [](double s) { return -s * s * s + 4 * s; },
                         1001, 100.0);
  EXPECT_NEAR(rms_kinematic(t, 3), std::sqrt(144.0 + 36.0), std::sqrt(180.0) * 0.005);
  // Acceleration (12 t - 2, -6 t): RMS over t in [0, 10] by integration.
  const double acc_sq = [] {
    const double T = 10.0;  // integral of (12t-2)^2 + 36t^2 over [0,T] / T
    return (144.0 * T * T * T / 3 - 24.0 * T * T + 4.0 * T + 12.0 * T * T * T) / T;
  }();
  EXPECT_NEAR(rms_kinematic(t, 2), std::sqrt(acc_sq), std::sqrt(acc_sq) * 0.005);
}

TEST(RmsKinematic, TooShort) {
  const auto t = sampled([](double s) { return s; }, [](double s) { return s; }, 4, 1.0);
  EXPECT_ERROR_KIND(rms_kinematic(t, 3), ErrorKind::SeriesTooShort);
}

TEST(PathLength, Examples) {
  const auto still = sampled([](double) { return 1.0; }, [](double) { return 2.0; }, 10, 1.0);
  EXPECT_EQ(path_length(still), 0.0);
  const auto line = sampled([](double s) { return 3.0 * s / 9.0; }, [](double s) { return 4.0 * s / 9.0; }, 10, 1.0);
  EXPECT_NEAR(path_length(line), 5.0, 1e-12);
  ToolTrack unit{Tool::Left, {}, 1.0};
  for (int i = 0; i <= 360; ++i) {
    const double a = 2 * std::numbers::pi * i / 360.0;
    unit.samples.push_back({i, std::cos(a), std::sin(a)});
  }
  EXPECT_NEAR(path_length(unit), 2 * std::numbers::pi, 2 * std::numbers::pi * 1e-3);
  const auto big = circle(100.0, 1.0, 200.0, 2 * std::numbers::pi);
  EXPECT_NEAR(path_length(big), 200 * std::numbers::pi, 200 * std::numbers::pi * 1e-3);
  unit.samples.resize(1);
  EXPECT_ERROR_KIND(path_length(unit), ErrorKind::SeriesTooShort);
}

TEST(BimanualDexterity, Examples) {
  const auto left = sampled([](double t) { return 50 * std::sin(t) + 3 * t * t; }, [](double t) { return 20 * std::cos(2 * t); },
                            300, 30.0);
  const auto right = transformed(left, 1.0, 300.0, -40.0);
  EXPECT_NEAR(bimanual_dexterity(left, right), 1.0, 1e-9);

  const auto still = sampled([](double) { return 5.0; }, [](double) { return 5.0; }, 300, 30.0);
  EXPECT_EQ(bimanual_dexterity(left, still), 0.0);

  // Alternating activity: left moves while right rests, then the reverse.
  ToolTrack a{Tool::Left, {}, 1.0}, b{Tool::Right, {}, 1.0};
  double ax = 0.0, bx = 0.0;
  for (int i = 0; i < 200; ++i) {
    const bool left_turn = (i / 25) % 2 == 0;
    ax += left_turn ? 1.0 : 0.0;
    bx += left_turn ? 0.0 : 1.0;
    a.samples.push_back({i, ax, 0.0});
    b.samples.push_back({i, bx, 0.0});
  }
  EXPECT_LT(bimanual_dexterity(a, b), 0.0);

  a.samples.resize(3);
  EXPECT_ERROR_KIND(bimanual_dexterity(a, b), ErrorKind::SeriesTooShort);
}

TEST(FeatureInvariants, TranslationScaleAndReversal) {
  const auto left = sampled([](double t) { return 100 + 40 * std::sin(1.3 * t) + 5 * t; },
                            [](double t) { return 80 + 30 * std::cos(0.7 * t); }, 400, 60.0);
  const auto right = sampled([](double t) { return 300 + 25 * std::sin(0.9 * t); },
                             [](double t) { return 90 + 35 * std::sin(1.1 * t + 0.4); }, 400, 60.0, Tool::Right);
  const auto base = features_for(left, right);

  const auto shifted = features_for(transformed(left, 1.0, 17.0, -9.0), transformed(right, 1.0, 17.0, -9.0));
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(shifted.values[i], base.values[i], 1e-9 * (1 + std::abs(base.values[i])));

  const double k = 3.0;
  const auto scaled = features_for(transformed(left, k, 0, 0), transformed(right, k, 0, 0));
  for (std::size_t i = 0; i + 1 < kFeatureCount; ++i) EXPECT_NEAR(scaled.values[i], k * base.values[i], 1e-9 * k * base.values[i]);
  EXPECT_NEAR(scaled[Feature::BimanualDexterity], base[Feature::BimanualDexterity], 1e-12);

  auto reverse = [](ToolTrack t) {
    std::ranges::reverse(t.samples);
    for (std::size_t i = 0; i < t.samples.size(); ++i) t.samples[i].frame = static_cast<std::int64_t>(i);
    return t;
  };
  EXPECT_NEAR(path_length(reverse(left)), path_length(left), 1e-9);
  for (int order = 1; order <= 3; ++order) {
    EXPECT_NEAR(rms_kinematic(reverse(left), order), rms_kinematic(left, order), 1e-9 * rms_kinematic(left, order));
  }
  EXPECT_NEAR(base[Feature::TotalPathLength], path_length(left) + path_length(right), 1e-9);
}

TEST(ExtractFeatures, PerSegmentAndPerTrial) {
  const auto l = sampled([](double t) { return 10 * t; }, [](double t) { return std::sin(t); }, 50, 10.0);
  const auto r = sampled([](double t) { return 5 * t * t; }, [](double t) { return std::cos(t); }, 50, 10.0);
  SutureTrial trial{"subj", Label::Expert, {}, "trial-a"};
  for (SegmentId id : {SegmentId::S1, SegmentId::S2, SegmentId::S3}) trial.segments[id] = segment_of(l, r);
  trial.segments[SegmentId::S4] = {l, r, true};

  const auto rows = extract_features(trial, {Granularity::PerSegment, false});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].sample_id, "trial-a:S1");
  EXPECT_EQ(rows[0].subject_id, "subj");
  EXPECT_EQ(extract_features(trial, {Granularity::PerSegment, true}).size(), 4u);

  const auto whole = extract_features(trial, {Granularity::PerTrial, false});
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0].sample_id, "trial-a");
  EXPECT_EQ(whole[0].label, Label::Expert);

  trial.segments.erase(SegmentId::S3);
  EXPECT_ERROR_KIND(extract_features(trial, {Granularity::PerTrial, false}), ErrorKind::MissingSegments);
}

TEST(ExtractFeatures, StationaryTrialIsAllZero) {
  const auto still = sampled([](double) { return 4.0; }, [](double) { return 9.0; }, 30, 10.0);
  SutureTrial trial{"s", Label::Novice, {}, "s"};
  for (SegmentId id : {SegmentId::S1, SegmentId::S2, SegmentId::S3}) trial.segments[id] = segment_of(still, still);
  for (const auto& row : extract_features(trial)) {
    for (double v : row.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(ExtractFeatures, SyntheticNoviceMovesMoreErratically) {
  GeneratorConfig cfg;
  cfg.n_subjects_per_class = 1;
  cfg.seed = 7;
  const auto d = generate_dataset(cfg);
  const auto expert = extract_features(d.trials[0], {Granularity::PerTrial, false})[0];
  const auto novice = extract_features(d.trials[1], {Granularity::PerTrial, false})[0];
  ASSERT_EQ(expert.label, Label::Expert);
  ASSERT_EQ(novice.label, Label::Novice);
  EXPECT_GT(novice[Feature::RmsJerkLeft], expert[Feature::RmsJerkLeft]);
  EXPECT_GT(novice[Feature::RmsJerkRight], expert[Feature::RmsJerkRight]);
  EXPECT_GT(novice[Feature::TotalPathLength], expert[Feature::TotalPathLength]);
}

TEST(DropAcceleration, LeavesSixColumns) {
  FeatureMatrix m;
  FeatureVector v;
  for (std::size_t i = 0; i < kFeatureCount; ++i) v.values[i] = static_cast<double>(i) + 0.5;
  m.rows.push_back(v);
  EXPECT_EQ(m.active_columns().size(), 8u);
  const auto dropped = drop_acceleration(m);
  const auto cols = dropped.active_columns();
  ASSERT_EQ(cols.size(), 6u);
  for (Feature f : cols) {
    EXPECT_NE(f, Feature::RmsAccelerationLeft);
    EXPECT_NE(f, Feature::RmsAccelerationRight);
    EXPECT_EQ(dropped.rows[0][f], v[f]);
  }
  EXPECT_ERROR_KIND(drop_acceleration(dropped), ErrorKind::AlreadyDropped);
}

TEST(FeaturesCsv, HeaderAndRoundTrip) {
  FeatureVector a{"t1:S1", "t1", Label::Expert, {}};
  FeatureVector b{"t2", "subject-2", Label::Novice, {}};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    a.values[i] = 1.0 + static_cast<double>(i);
    b.values[i] = 0.25 * static_cast<double>(i);
  }
  std::ostringstream out;
  write_features_csv(out, {a, b});
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "sample_id,label,rms_vel_l,rms_vel_r,rms_acc_l,rms_acc_r,rms_jerk_l,rms_jerk_r,path_total,"
            "bimanual_dexterity,subject");
  std::istringstream in(text);
  const auto rows = read_features_csv(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].subject_id, "subject-2");
  EXPECT_EQ(rows[0].subject_id, "t1");
  EXPECT_EQ(rows[0].label, Label::Expert);
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_NEAR(rows[1].values[i], b.values[i], 1e-9);

  std::ostringstream plain;
  write_features_csv(plain, {a});
  EXPECT_EQ(plain.str().substr(0, plain.str().find('\n')),
            "sample_id,label,rms_vel_l,rms_vel_r,rms_acc_l,rms_acc_r,rms_jerk_l,rms_jerk_r,path_total,"
            "bimanual_dexterity");
}
