#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pbec/config_io.hpp"
#include "support/generators.hpp"

namespace {

using namespace pbec;

const std::filesystem::path data_dir = PBEC_TEST_DATA;

std::string config_error(const json& j) {
  try {
    config_from_json(j, data_dir);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(Ladder, FrequenciesAndDegeneracies) {
  ModeLadder l;
  const auto s = l.spectrum();
  ASSERT_EQ(s.size(), 801u);
  EXPECT_DOUBLE_EQ(s.omega[0], 3400.0);
  EXPECT_DOUBLE_EQ(s.omega[800], 3600.0);
  EXPECT_DOUBLE_EQ(s.degeneracy[0], 1.0);
  EXPECT_DOUBLE_EQ(s.degeneracy[10], 11.0);
  l.polarization = true;
  EXPECT_DOUBLE_EQ(l.degeneracy(10), 22.0);
}

TEST(Config, DefaultPaperLadderAccepted) {
  const auto c = config_from_json(json{{"ladder", {{"epsilon", 0.25}, {"m_max", 800}}}});
  EXPECT_DOUBLE_EQ(c.ladder.epsilon, 0.25);
  EXPECT_EQ(c.ladder.m_max, 800);
}

TEST(Config, ZeroEpsilonNamesFieldAndBound) {
  const auto msg = config_error(json{{"ladder", {{"epsilon", 0.0}}}});
  EXPECT_NE(msg.find("epsilon must be positive"), std::string::npos) << msg;
}

TEST(Config, OtherInvariantViolations) {
  EXPECT_NE(config_error(json{{"ladder", {{"omega0", -1.0}}}}).find("ladder.omega0"), std::string::npos);
  EXPECT_NE(config_error(json{{"ladder", {{"m_max", 0}}}}).find("ladder.m_max"), std::string::npos);
  EXPECT_NE(config_error(json{{"dye", {{"n_molecules", 0.5}}}}).find("dye.n_molecules"), std::string::npos);
  EXPECT_NE(config_error(json{{"dye", {{"t_cold", 0.0}}}}).find("dye.t_cold"), std::string::npos);
  EXPECT_NE(config_error(json{{"dye", {{"gamma_up", -1.0}}}}).find("dye.gamma_up"), std::string::npos);
  EXPECT_NE(config_error(json{{"pump", {{"kappa", -1.0}}}}).find("pump.kappa"), std::string::npos);
  EXPECT_NE(config_error(json{{"pump", {{"scenario", "external-many-level"}}}}).find("t_hot"), std::string::npos);
  EXPECT_NE(config_error(json{{"pump", {{"scenario", "laser"}}}}).find("pump.scenario"), std::string::npos);
  EXPECT_NE(config_error(json{{"ladder", {{"bogus", 1}}}}).find("unknown key 'ladder.bogus'"), std::string::npos);
  EXPECT_NE(config_error(json{{"ladder", {{"epsilon", "wide"}}}}).find("configuration"), std::string::npos);
}

TEST(Config, TabulatedProfileMustBeSorted) {
  const json inline_points = {{"dye", {{"absorption", {{"kind", "tabulated"}, {"points", {{3300, 1}, {3290, 1}, {3700, 1}}}}}}}};
  EXPECT_NE(config_error(inline_points).find("strictly increasing"), std::string::npos);
  const json from_csv = {{"dye", {{"absorption", {{"kind", "tabulated"}, {"csv", "unsorted.csv"}}}}}};
  EXPECT_NE(config_error(from_csv).find("strictly increasing"), std::string::npos);
}

TEST(Config, TabulatedProfileMustCoverLadder) {
  const json narrow = {{"dye", {{"absorption", {{"kind", "tabulated"}, {"points", {{3300, 1}, {3500, 1}}}}}}}};
  EXPECT_NE(config_error(narrow).find("does not cover"), std::string::npos);
}

TEST(Config, CsvProfileRelativeToConfigFile) {
  const auto c = config_from_json(
      json{{"ladder", {{"m_max", 400}}}, {"dye", {{"absorption", {{"kind", "tabulated"}, {"csv", "absorption_gaussian.csv"}}}}}},
      data_dir);
  const auto& t = std::get<TabulatedProfile>(c.dye.absorption);
  EXPECT_EQ(t.omega.size(), 61u);
  EXPECT_DOUBLE_EQ(absorption_rate(c.dye.absorption, 3500.0), 1.0);
  // Halfway between two samples the rule is linear.
  const double mid = absorption_rate(c.dye.absorption, 3302.5);
  EXPECT_DOUBLE_EQ(mid, 0.5 * (t.rate[0] + t.rate[1]));
  EXPECT_THROW(absorption_rate(c.dye.absorption, 3299.0), std::out_of_range);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config(data_dir / "nope.json"), ConfigError); }

TEST(Config, MalformedJson) {
  const auto path = std::filesystem::temp_directory_path() / "pbec_bad.json";
  std::ofstream(path) << "{ \"ladder\": ";
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(ConfigProperty, RoundTripIsLossless) {
  gen::Gen gen(21);
  const auto dir = std::filesystem::temp_directory_path();
  for (int i = 0; i < 200; ++i) {
    const auto c = gen.config();
    ASSERT_NO_THROW(c.validate());
    EXPECT_EQ(config_from_json(to_json(c)), c);
    const auto path = dir / ("pbec_roundtrip_" + std::to_string(i % 4) + ".json");
    save_config(c, path);
    EXPECT_EQ(load_config(path), c);
  }
}

TEST(Scenario, DyePumpRateFromHotTemperature) {
  ScenarioConfig c;
  const auto p = std::get<DyePumped>(c.pump_scenario(ScenarioKind::DyePumped, 10500.0));
  const double th = temperature_to_frequency(10500.0);
  EXPECT_NEAR(p.gamma_up / p.gamma_down, std::exp(-c.dye.omega_d / th), 1e-15);
}

TEST(Scenario, TwoLevelSpectrum) {
  ScenarioConfig c;
  const auto s = c.spectrum(ScenarioKind::ExternalTwoLevel);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.omega[1], c.pump.two_level.omega_s);
  EXPECT_EQ(s.degeneracy[1], c.pump.two_level.g_s);
}

} // namespace
