#include "oracles.hpp"

#include "onset/error.hpp"
#include "onset/features.hpp"
#include "onset/synth.hpp"

#include <doctest.h>

#include <numeric>
#include <set>

using namespace onset;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an onset::Error");
  return ErrorKind::Io;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> x(n);
  std::iota(x.begin(), x.end(), 1.0);
  return x;
}

MultichannelSignal random_window(Rng& rng, std::size_t channels, std::size_t n = 128) {
  return oracle::random_signal(rng, channels, n);
}

}  // namespace

TEST_CASE("basic statistics") {
  const std::vector<double> x{1, 2, 3};
  CHECK(mean(x) == 2.0);
  CHECK(max(x) == 3.0);
  CHECK(min(x) == 1.0);
  CHECK(sum(x) == 6.0);

  const std::vector<double> c(128, 7.0);
  CHECK(mean(c) == 7.0);
  CHECK(max(c) == 7.0);
  CHECK(min(c) == 7.0);
  CHECK(sum(c) == 896.0);

  const std::vector<double> empty;
  CHECK(kind_of([&] { mean(empty); }) == ErrorKind::EmptySeries);
  CHECK(kind_of([&] { max(empty); }) == ErrorKind::EmptySeries);
  CHECK(kind_of([&] { min(empty); }) == ErrorKind::EmptySeries);
  CHECK(kind_of([&] { sum(empty); }) == ErrorKind::EmptySeries);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = oracle::random_series(rng, 1 + rng.uniform_index(500), 10.0, 3.0);
    const double n = static_cast<double>(r.size());
    CHECK(std::abs(sum(r) - mean(r) * n) <= 1e-9 * std::max(1.0, std::abs(sum(r))));
  }
}

TEST_CASE("skewness against hand-worked and brute-force moments") {
  CHECK(std::abs(skewness(std::vector<double>{1, 2, 3})) < 1e-15);
  const std::vector<double> x{1, 1, 1, 5};
  const auto ref = oracle::brute_force_moments(x);
  CHECK(skewness(x) == doctest::Approx(6.0 / std::pow(3.0, 1.5)).epsilon(1e-12));
  CHECK(skewness(x) == doctest::Approx(static_cast<double>(ref.skewness)).epsilon(1e-12));
  CHECK(kind_of([] { skewness(std::vector<double>{7, 7, 7, 7}); }) == ErrorKind::DegenerateVariance);
  CHECK(kind_of([] { skewness(std::vector<double>{1, 2}); }) == ErrorKind::SeriesTooShort);
  // 0.1 does not survive the mean exactly; the constant check must not depend on it
  CHECK(kind_of([] { skewness(std::vector<double>{0.1, 0.1, 0.1}); }) == ErrorKind::DegenerateVariance);
}

TEST_CASE("kurtosis is the plain (non-excess) standardized fourth moment") {
  CHECK(kurtosis(std::vector<double>{-1, 1, -1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> x{1, 1, 1, 5};
  CHECK(kurtosis(x) == doctest::Approx(21.0 / 9.0).epsilon(1e-12));
  CHECK(kurtosis(x) == doctest::Approx(static_cast<double>(oracle::brute_force_moments(x).kurtosis)).epsilon(1e-12));
  CHECK(kind_of([] { kurtosis(std::vector<double>{2, 2, 2, 2, 2}); }) == ErrorKind::DegenerateVariance);
  CHECK(kind_of([] { kurtosis(std::vector<double>{1, 2, 3}); }) == ErrorKind::SeriesTooShort);

  Rng rng(99);
  const auto normal = oracle::random_series(rng, 100000);
  CHECK(std::abs(kurtosis(normal) - 3.0) < 0.3);
}

TEST_CASE("moment symmetry and affine invariance") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_series(rng, 4 + rng.uniform_index(256), 1.0 + 9.0 * rng.uniform01());
    std::vector<double> neg(x.size());
    std::vector<double> affine(x.size());
    const double a = 0.1 + 20.0 * rng.uniform01();
    const double b = 100.0 * (rng.uniform01() - 0.5);
    for (std::size_t i = 0; i < x.size(); ++i) {
      neg[i] = -x[i];
      affine[i] = a * x[i] + b;
    }
    const double s = skewness(x);
    const double k = kurtosis(x);
    CHECK(std::abs(skewness(neg) + s) <= 1e-9);
    CHECK(std::abs(kurtosis(neg) - k) <= 1e-9);
    CHECK(std::abs(skewness(affine) - s) <= 1e-9);
    CHECK(std::abs(kurtosis(affine) - k) <= 1e-9 * std::max(1.0, k));
  }
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(std::vector<double>(50, 3.25), 64) == 0.0);

  std::vector<double> uniform;
  for (int rep = 0; rep < 16; ++rep)
    for (int b = 0; b < 8; ++b) uniform.push_back(b);
  CHECK(shannon_entropy(uniform, 8) == doctest::Approx(3.0).epsilon(1e-12));

  const std::vector<double> skewed{0, 0, 0, 1};
  const double expected = -(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25));
  CHECK(shannon_entropy(skewed, 2) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(shannon_entropy(skewed, 2) == doctest::Approx(oracle::distinct_value_entropy(skewed)).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.8113).epsilon(1e-4));

  CHECK(kind_of([] { shannon_entropy(std::vector<double>{}, 8); }) == ErrorKind::EmptySeries);
  CHECK(kind_of([] { shannon_entropy(std::vector<double>{1, 2}, 1); }) == ErrorKind::InvalidConfig);

  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t bins = 2 + rng.uniform_index(100);
    const auto x = oracle::random_series(rng, 1 + rng.uniform_index(300));
    const double h = shannon_entropy(x, bins);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(static_cast<double>(bins)));
  }
}

TEST_CASE("generalized Hurst exponent of a ramp is 1 for every q") {
  const auto cfg = FeatureConfig::hurst_multi_q();
  const auto x = ramp(128);
  for (int q = 1; q <= 5; ++q) CHECK(std::abs(generalized_hurst(x, q, cfg) - 1.0) < 1e-6);
}

TEST_CASE("generalized Hurst edge cases") {
  const auto cfg = FeatureConfig::hurst_multi_q();
  CHECK(generalized_hurst(std::vector<double>(128, 4.0), 1, cfg) == 0.0);
  CHECK(kind_of([&] { generalized_hurst(std::vector<double>(128, 0.0), 1, cfg); }) == ErrorKind::ZeroNormalizer);
  CHECK(kind_of([&] { generalized_hurst(ramp(75), 1, cfg); }) == ErrorKind::SeriesTooShort);
  CHECK_NOTHROW(generalized_hurst(ramp(76), 1, cfg));
  CHECK(kind_of([&] { generalized_hurst(ramp(128), 0, cfg); }) == ErrorKind::InvalidConfig);

  // time resolution only shifts log(tau/nu) and thins the averages
  FeatureConfig coarse = cfg;
  coarse.hurst_nu = 2;
  CHECK(std::abs(generalized_hurst(ramp(128), 1, coarse) - 1.0) < 1e-6);
}

TEST_CASE("generalized Hurst on white noise and fBm") {
  const auto cfg = FeatureConfig::hurst_multi_q();
  double white = 0.0;
  double fbm = 0.0;
  constexpr int kTrials = 100;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng rng(derive_seed(2024, trial));
    white += generalized_hurst(oracle::random_series(rng, 1024), 1, cfg);
    fbm += generalized_hurst(generate_fbm(1024, 0.7, derive_seed(77, trial)), 1, cfg);
  }
  CHECK(std::abs(white / kTrials) < 0.1);
  CHECK(fbm / kTrials >= 0.6);
  CHECK(fbm / kTrials <= 0.8);
}

TEST_CASE("extract_features dimensions and layout") {
  Rng rng(21);
  const auto w14 = random_window(rng, 14);
  const auto stats = extract_features(w14, FeatureConfig::stats8());
  CHECK(stats.values.size() == 112);
  CHECK(stats.layout.size() == 112);
  const auto hurst = extract_features(w14, FeatureConfig::hurst_multi_q());
  CHECK(hurst.values.size() == 70);

  const auto w2 = random_window(rng, 2);
  const auto small = extract_features(w2, FeatureConfig::stats8());
  REQUIRE(small.values.size() == 16);
  const std::vector<std::string> expected_features{"mean", "max", "min", "kurtosis", "skewness", "sum", "entropy", "hurst_q1"};
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < 8; ++f) {
      CHECK(small.layout[c * 8 + f].channel == w2.channel_names()[c]);
      CHECK(small.layout[c * 8 + f].feature == expected_features[f]);
    }
  }
  std::set<std::string> names;
  for (const auto& d : stats.layout) names.insert(d.name());
  CHECK(names.size() == stats.layout.size());
  CHECK(stats.layout[4 * 8 + 4].name() == w14.channel_names()[4] + ":skewness");

  // values line up with the scalar functions
  const auto ch0 = w2.channel(0);
  CHECK(small.values[0] == mean(ch0));
  CHECK(small.values[3] == kurtosis(ch0));
  CHECK(small.values[4] == skewness(ch0));
  CHECK(small.values[5] == sum(ch0));
  CHECK(small.values[6] == shannon_entropy(ch0, 64));
  CHECK(small.values[7] == generalized_hurst(ch0, 1, FeatureConfig::stats8()));
  for (double v : stats.values) CHECK(std::isfinite(v));
}

TEST_CASE("extract_features maps degenerate channels to zero") {
  // identical channels become all-zero after CAR
  std::vector<std::vector<double>> chans(3, ramp(128));
  const auto w = apply_car(MultichannelSignal::from_channels({"A", "B", "C"}, chans));
  const auto fv = extract_features(w, FeatureConfig::stats8());
  CHECK(fv.degenerate_features == 9);  // kurtosis, skewness, H per channel
  for (double v : fv.values) CHECK(v == 0.0);
  const auto fh = extract_features(w, FeatureConfig::hurst_multi_q());
  CHECK(fh.degenerate_features == 15);
}

TEST_CASE("extract_features is deterministic and propagates SeriesTooShort") {
  Rng rng(8);
  const auto w = random_window(rng, 5);
  const auto a = extract_features(w, FeatureConfig::hurst_multi_q());
  const auto b = extract_features(w, FeatureConfig::hurst_multi_q());
  CHECK(a.values == b.values);
  CHECK(kind_of([&] { extract_features(random_window(rng, 3, 40), FeatureConfig::stats8()); }) ==
        ErrorKind::SeriesTooShort);
}

TEST_CASE("feature config validation") {
  FeatureConfig cfg = FeatureConfig::hurst_multi_q();
  CHECK_NOTHROW(cfg.validate(128));
  CHECK(kind_of([&] { cfg.validate(64); }) == ErrorKind::InvalidConfig);  // tau_max 19 > 64/4
  FeatureConfig bad = cfg;
  bad.hurst_tau_min = 1;
  CHECK(kind_of([&] { bad.validate(128); }) == ErrorKind::InvalidConfig);
  bad = cfg;
  bad.q_values = {1, 3, 2};
  CHECK(kind_of([&] { bad.validate(128); }) == ErrorKind::InvalidConfig);
  bad = cfg;
  bad.q_values.clear();
  CHECK(kind_of([&] { bad.validate(128); }) == ErrorKind::InvalidConfig);
  bad = FeatureConfig::stats8();
  bad.entropy_bins = 1;
  CHECK(kind_of([&] { bad.validate(128); }) == ErrorKind::InvalidConfig);
  CHECK(feature_kind_from_string("hurst") == FeatureKind::HurstMultiQ);
  CHECK(kind_of([] { feature_kind_from_string("wavelet"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("feature matrix CSV") {
  FeatureMatrix m(FeatureLayout{{"C3", "skewness"}, {"C4", "hurst_q2"}});
  m.add_row(std::vector<double>{0.5, -1.25e-7}, 1);
  m.add_row(std::vector<double>{3.0, 0.1}, 0);
  const std::string csv = format_feature_matrix(m);
  CHECK(csv.rfind("C3:skewness,C4:hurst_q2,label\n", 0) == 0);
  CHECK(parse_feature_matrix(csv) == m);

  FeatureMatrix unlabeled(FeatureLayout{{"A", "mean"}});
  unlabeled.add_row(std::vector<double>{1.0}, FeatureMatrix::kUnlabeled);
  CHECK(format_feature_matrix(unlabeled) == "A:mean\n1\n");
  CHECK(parse_feature_matrix("A:mean\n1\n") == unlabeled);

  CHECK(kind_of([&] { m.add_row(std::vector<double>{1.0}, 0); }) == ErrorKind::InconsistentWidth);
  CHECK(kind_of([] { parse_feature_matrix("A:mean,label\n1,2\n"); }) == ErrorKind::MalformedFile);
  CHECK(kind_of([] { parse_feature_matrix("mean,label\n1,0\n"); }) == ErrorKind::MalformedFile);
  CHECK(kind_of([] { parse_feature_matrix("A:mean,A:mean\n1,2\n"); }) == ErrorKind::MalformedFile);
}
