#include <gtest/gtest.h>

#include "support.hpp"

using namespace delaystab;

namespace {

/// Line and column of the ParseError raised by `text`, or (0, 0).
std::pair<std::size_t, std::size_t> error_at(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  return {0, 0};
}

}  // namespace

TEST(Parser, ReadsRunningExample) {
  auto net = fixtures::fixture("running_example");
  EXPECT_EQ(net.name(), "running_example");
  EXPECT_EQ(net.species(), (std::vector<std::string>{"A1", "A2", "A3"}));
  ASSERT_EQ(net.num_reactions(), 6u);
  const auto& r0 = net.reaction(0);
  EXPECT_EQ(r0.source[0], 1u);
  EXPECT_EQ(r0.source[1], 1u);
  EXPECT_EQ(r0.target[2], 1u);
  EXPECT_EQ(std::get<UniformDelay>(r0.delay).symbol, std::optional<std::string>("tau1"));
  EXPECT_TRUE(net.reaction(2).is_inflow());
  EXPECT_TRUE(net.reaction(3).is_outflow());
}

TEST(Parser, CoefficientsCommentsAndImplicitSpecies) {
  auto net = parse_network("# header\nreaction 2A + B -> 3C rate k1 delay 0  # trailing\n\nreaction C -> 0 rate k2\n");
  EXPECT_EQ(net.species(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(net.reaction(0).source[0], 2u);
  EXPECT_EQ(net.reaction(0).target[2], 3u);
  EXPECT_FALSE(has_delay(net.reaction(0).delay));
}

TEST(Parser, ReversibleArrowExpands) {
  auto net = parse_network("reaction A <-> B rate k\nreaction A -> 0 rate d\n");
  EXPECT_EQ(net.rate_symbols(), (std::vector<std::string>{"k_fwd", "k_rev", "d"}));
  EXPECT_EQ(net.reaction(1).source, net.reaction(0).target);
}

TEST(Parser, PerProductDelays) {
  auto net = fixtures::fixture("nitric_oxide");
  const auto& rx = net.reaction(7);
  const auto& pp = std::get<PerProductDelay>(rx.delay);
  EXPECT_EQ(pp.symbols.at(1), "tau2");
  EXPECT_EQ(pp.symbols.at(4), "tau5");
  EXPECT_EQ(delay_for_product(rx.delay, 1), std::optional<std::string>("tau2"));
  EXPECT_EQ(delay_for_product(rx.delay, 0), std::nullopt);
}

TEST(Parser, DslRoundTripPreservesEveryFixture) {
  for (const auto& name : fixtures::all_fixtures()) {
    auto net = fixtures::fixture(name);
    auto again = parse_network(to_dsl(net), net.name());
    EXPECT_EQ(again.species(), net.species()) << name;
    ASSERT_EQ(again.num_reactions(), net.num_reactions()) << name;
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
      EXPECT_EQ(again.reaction(r).source, net.reaction(r).source) << name;
      EXPECT_EQ(again.reaction(r).target, net.reaction(r).target) << name;
      EXPECT_EQ(again.reaction(r).rate, net.reaction(r).rate) << name;
      EXPECT_EQ(again.reaction(r).delay, net.reaction(r).delay) << name;
    }
    EXPECT_EQ(to_dsl(again), to_dsl(net)) << name;
  }
}

TEST(Parser, ErrorsCarryLineAndColumn) {
  EXPECT_EQ(error_at("species A\nreaction A -> B rate k\n"), std::make_pair(std::size_t(2), std::size_t(15)));
  EXPECT_EQ(error_at("reaction A => B rate k\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> B rate k\nreaction B -> A rate k\n").first, 2u);
  EXPECT_EQ(error_at("reaction 0 -> A rate k delay tau\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> 0 rate k delay tau\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> B rate k delay {A: tau}\n").first, 1u);
  EXPECT_EQ(error_at("reaction A <-> B rate k delay tau\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> A rate k\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> B rate k extra\n").first, 1u);
  EXPECT_EQ(error_at("reaction A -> B rate k delay 2\n").first, 1u);
  EXPECT_EQ(error_at("frobnicate A\n").first, 1u);
}

TEST(Parser, KeyValueFiles) {
  auto kv = parse_key_values("# rates\nk1 = 2.5\nk2=1/3   # comment\n\n");
  EXPECT_EQ(kv.at("k1"), Rational(5, 2));
  EXPECT_EQ(kv.at("k2"), Rational(1, 3));
  EXPECT_THROW(parse_key_values("k1 2\n"), ParseError);
}

TEST(Parser, FileStem) {
  EXPECT_EQ(file_stem("/a/b/net.crn"), "net");
  EXPECT_EQ(file_stem("net"), "net");
}
