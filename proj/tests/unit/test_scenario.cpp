#include <gtest/gtest.h>

#include <sstream>

#include "hybridcdn/errors.hpp"
#include "hybridcdn/scenario.hpp"

using namespace hybridcdn;

namespace {
ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}
}  // namespace

TEST(Scenario, DefaultsAreValid) { EXPECT_NO_THROW(ScenarioConfig{}.validate()); }

TEST(Scenario, ParsesKeysCommentsAndWhitespace) {
  const auto c = parse(
      "# desk run\n"
      "seed = 9\n"
      "  duration_s=120   # short\n"
      "\n"
      "policy = ECT\n"
      "abr = hybrid-proxy\n"
      "selection = strict-priority\n"
      "churn = true\n"
      "churn_mean_session_s = 60\n"
      "ladder = 100000:low,500000:mid\n"
      "reference_vmaf = 40,80\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.duration_s, 120.0);
  EXPECT_EQ(c.policy, Policy::Ect);
  EXPECT_EQ(c.abr, AbrKind::HybridProxy);
  EXPECT_EQ(c.selection, SelectionRule::StrictPriority);
  EXPECT_TRUE(c.churn.enabled);
  EXPECT_EQ(c.churn.mean_session_s, 60.0);
  ASSERT_EQ(c.ladder.size(), 2u);
  EXPECT_EQ(c.ladder[1].bitrate_bps, 500000);
  EXPECT_EQ(c.ladder[1].resolution_label, "mid");
  EXPECT_EQ(c.reference_vmaf, (std::vector<double>{40, 80}));
}

TEST(Scenario, Errors) {
  EXPECT_THROW(parse("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse("peer_count = many\n"), ConfigError);
  EXPECT_THROW(parse("peer_count\n"), ConfigError);
  EXPECT_THROW(parse("peer_count = 0\n"), ConfigError);
  EXPECT_THROW(parse("seeder_fraction = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("cdn_cache_fraction = 0\n"), ConfigError);
  EXPECT_THROW(parse("policy = BEST\n"), ConfigError);
  EXPECT_THROW(parse("peer_count = 3\ngroup_count = 4\n"), ConfigError);
  EXPECT_THROW(parse("duration_s = -1\n"), ConfigError);
  EXPECT_THROW(parse("ladder = 500000:a,100000:b\n"), ConfigError);
}

TEST(Scenario, WriteParseRoundTrip) {
  ScenarioConfig c;
  c.seed = 12345678901ull;
  c.duration_s = 0.1 + 0.2;
  c.policy = Policy::Nth;
  c.abr = AbrKind::HybridProxy;
  c.churn.enabled = true;
  c.churn.arrival_rate_per_s = 1.0 / 3.0;
  c.peer_transcoding = false;
  c.bola.v = 2.7;
  std::stringstream ss;
  write_scenario(ss, c);
  const auto back = parse_scenario(ss);
  std::stringstream again;
  write_scenario(again, back);
  EXPECT_EQ(again.str(), [&] {
    std::stringstream s;
    write_scenario(s, c);
    return s.str();
  }());
  EXPECT_EQ(back.duration_s, c.duration_s);
  EXPECT_EQ(back.churn.arrival_rate_per_s, c.churn.arrival_rate_per_s);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_FALSE(back.peer_transcoding);
}

TEST(Scenario, CheckedInDeskScenarioLoads) {
  const auto c = load_scenario(std::string(HYBRIDCDN_SOURCE_DIR) + "/scenarios/desk_scale.conf");
  EXPECT_EQ(c.peer_count, 50);
  EXPECT_EQ(c.duration_s, 600.0);
  EXPECT_THROW(load_scenario("/nonexistent/file.conf"), ConfigError);
}
