#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ogss/selection/selection.hpp"

namespace ogss::selection {
namespace {

using chess::MoveCode;

MoveCode uci(std::string_view text) { return *MoveCode::parse_uci(text); }

ConfidenceMap make_map(std::vector<std::string> moves, std::vector<double> conf) {
  ConfidenceMap m;
  for (const auto& s : moves) m.moves.push_back(uci(s));
  m.conf = std::move(conf);
  return m;
}

RiskSource fixed(const ConfidenceMap& m, std::vector<double> risks) { return RiskSource(m.moves, std::move(risks)); }

// Random legal-looking set: distinct canonical-ordered moves, quantized
// confidences (so ties occur) renormalized to sum 1.
struct Case {
  ConfidenceMap conf;
  std::vector<double> risk;
};

Case random_case(Rng& rng) {
  const std::size_t n = 1 + rng.uniform_index(40);
  std::set<MoveCode> moves;
  while (moves.size() < n) {
    MoveCode m{chess::Square(static_cast<int>(rng.uniform_index(64))),
               chess::Square(static_cast<int>(rng.uniform_index(64))), chess::Promotion::None};
    if (m.from != m.to) moves.insert(m);
  }
  Case c;
  c.conf.moves.assign(moves.begin(), moves.end());
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(rng.uniform_index(8));
    c.conf.conf.push_back(v);
    total += v;
  }
  for (auto& v : c.conf.conf) v = total > 0 ? v / total : 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) c.risk.push_back(static_cast<double>(rng.uniform_index(11)) / 10.0);
  return c;
}

std::size_t index_of(const ConfidenceMap& m, const MoveCode& mv) {
  return static_cast<std::size_t>(std::find(m.moves.begin(), m.moves.end(), mv) - m.moves.begin());
}

std::size_t greedy_index(const ConfidenceMap& m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.size(); ++i)
    if (m.conf[i] > m.conf[best]) best = i;  // canonical order breaks ties
  return best;
}

TEST(Config, ParametersMatchKind) {
  EXPECT_NO_THROW(StrategyConfig::top_k(3).validate());
  EXPECT_THROW(StrategyConfig::top_k(0).validate(), ConfigError);
  auto c = StrategyConfig::greedy();
  c.alpha = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = StrategyConfig::ogss_utility(0.6);
  c.alpha.reset();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(StrategyConfig::with_temperature(0).validate(), ConfigError);
  EXPECT_THROW(StrategyConfig::action_pruning(1.0).validate(), ConfigError);
  EXPECT_THROW(StrategyConfig::ogss_elimination(1.5).validate(), ConfigError);
  EXPECT_EQ(StrategyConfig::ogss_utility(0.6).label(), "ogss-utility(alpha=0.6)");
  EXPECT_EQ(StrategyConfig::top_k(5).label(), "top-k(K=5)");
  EXPECT_EQ(parse_kind("ogss-topk-shield"), StrategyKind::OgssTopKShield);
  EXPECT_THROW(parse_kind("bogus"), ConfigError);
}

TEST(Baseline, RandomConsidersEveryMove) {
  const auto legal = chess::legal_moves(chess::BoardState::startpos());
  const auto m = models::move_confidences(models::PolicyHeads{}, legal);
  Rng rng(1);
  const auto r = select(StrategyConfig::random(), m, nullptr, rng);
  EXPECT_EQ(r.considered_count, 20);
  EXPECT_DOUBLE_EQ(static_cast<double>(r.considered_count) / 20.0, 1.0);
}

TEST(Baseline, TemperatureNearZeroPicksArgmax) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3"}, {0.6, 0.3, 0.1});
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto r = select(StrategyConfig::with_temperature(0.01), m, nullptr, rng);
    EXPECT_EQ(r.move, uci("a2a3"));
    EXPECT_EQ(r.considered_count, 3);
  }
}

TEST(Baseline, TemperatureOneSamplesProportionally) {
  const auto m = make_map({"a2a3", "b2b3"}, {0.75, 0.25});
  Rng rng(3);
  int first = 0;
  for (int t = 0; t < 20000; ++t) first += select(StrategyConfig::with_temperature(1.0), m, nullptr, rng).move == uci("a2a3");
  EXPECT_NEAR(first / 20000.0, 0.75, 0.015);
}

TEST(Baseline, ActionPruningKeepsLowRisk) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3"}, {0.5, 0.3, 0.2});
  auto risk = fixed(m, {0.6, 0.4, 0.55});
  Rng rng(4);
  const auto r = select(StrategyConfig::action_pruning(0.5), m, &risk, rng);
  EXPECT_EQ(r.move, uci("b2b3"));
  EXPECT_EQ(r.considered_count, 1);
  EXPECT_FALSE(r.fallback_used);
  EXPECT_THROW(select(StrategyConfig::action_pruning(0.5), m, nullptr, rng), ConfigError);
}

TEST(Baseline, ActionPruningFallsBackToUniform) {
  const auto m = make_map({"a2a3", "b2b3"}, {0.5, 0.5});
  auto risk = fixed(m, {0.9, 0.8});
  Rng rng(5);
  const auto r = select(StrategyConfig::action_pruning(0.5), m, &risk, rng);
  EXPECT_TRUE(r.fallback_used);
  EXPECT_EQ(r.considered_count, 2);
}

TEST(Baseline, EntropyFilterBySurprisal) {
  // -log2: 0.5 -> 1 bit, 0.3 -> 1.74, 0.2 -> 2.32
  const auto m = make_map({"a2a3", "b2b3", "c2c3"}, {0.5, 0.3, 0.2});
  Rng rng(6);
  const auto r = select(StrategyConfig::entropy_filter(2.0), m, nullptr, rng);
  EXPECT_EQ(r.considered_count, 2);
  EXPECT_NE(r.move, uci("c2c3"));
  const auto g = select(StrategyConfig::entropy_filter(0.5), m, nullptr, rng);
  EXPECT_TRUE(g.fallback_used);
  EXPECT_EQ(g.considered_count, 1);
  EXPECT_EQ(g.move, uci("a2a3"));
}

TEST(Baseline, TopKSamplesOnlyTopK) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3", "d2d3"}, {0.1, 0.4, 0.3, 0.2});
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    const auto r = select(StrategyConfig::top_k(2), m, nullptr, rng);
    EXPECT_TRUE(r.move == uci("b2b3") || r.move == uci("c2c3"));
    EXPECT_EQ(r.considered_count, 2);
  }
  EXPECT_EQ(select(StrategyConfig::top_k(9), m, nullptr, rng).considered_count, 4);
}

TEST(Elimination, Examples) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3"}, {0.6, 0.3, 0.1});
  auto r1 = fixed(m, {0.9, 0.2, 0.0});
  const auto a = select_ogss_elimination(m, r1, 0.3);
  EXPECT_EQ(a.move, uci("b2b3"));
  EXPECT_EQ(a.considered_count, 2);
  EXPECT_EQ(r1.queries(), 2u);
  EXPECT_FALSE(a.diagnostics[2].risk.has_value());

  auto r2 = fixed(m, {0.9, 0.8, 0.7});
  const auto b = select_ogss_elimination(m, r2, 0.3);
  EXPECT_EQ(b.move, uci("a2a3"));
  EXPECT_TRUE(b.fallback_used);
  EXPECT_EQ(b.considered_count, 3);

  auto r3 = fixed(m, {0.1, 0.9, 0.9});
  const auto c = select_ogss_elimination(m, r3, 0.3);
  EXPECT_EQ(c.move, uci("a2a3"));
  EXPECT_EQ(c.considered_count, 1);
}

TEST(Utility, Examples) {
  const auto m = make_map({"a2a3", "b2b3"}, {0.8, 0.2});
  auto risk = fixed(m, {0.5, 0.0});
  const auto r = select_ogss_utility(m, risk, 0.6);
  EXPECT_NEAR(*r.diagnostics[0].utility, 0.68, 1e-12);
  EXPECT_NEAR(*r.diagnostics[1].utility, 0.6 * 0.2 + 0.4, 1e-12);
  EXPECT_EQ(r.move, uci("a2a3"));
  EXPECT_EQ(r.considered_count, 1);
  auto risk2 = fixed(m, {0.5, 0.0});
  EXPECT_EQ(select_ogss_utility(m, risk2, 0.0).move, uci("b2b3"));
  auto risk3 = fixed(m, {0.5, 0.0});
  EXPECT_EQ(select_ogss_utility(m, risk3, 1.0).move, uci("a2a3"));
}

TEST(Shield, Examples) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3", "d2d3"}, {0.4, 0.3, 0.2, 0.1});
  auto r = fixed(m, {0.4, 0.1, 0.3, 0.0});
  const auto s = select_ogss_topk_shield(m, r, 3);
  EXPECT_EQ(s.move, uci("b2b3"));
  EXPECT_EQ(s.considered_count, 3);
  EXPECT_EQ(r.queries(), 3u);
  auto r1 = fixed(m, {0.4, 0.1, 0.3, 0.0});
  EXPECT_EQ(select_ogss_topk_shield(m, r1, 1).move, uci("a2a3"));
  auto r9 = fixed(m, {0.4, 0.1, 0.3, 0.0});
  EXPECT_EQ(select_ogss_topk_shield(m, r9, 9).move, uci("d2d3"));
}

TEST(Shield, TiesPreferHigherConfidenceThenCanonical) {
  const auto m = make_map({"a2a3", "b2b3", "c2c3"}, {0.2, 0.5, 0.3});
  auto r = fixed(m, {0.1, 0.1, 0.1});
  EXPECT_EQ(select_ogss_topk_shield(m, r, 3).move, uci("b2b3"));
  const auto eq = make_map({"a2a3", "b2b3", "c2c3"}, {0.4, 0.4, 0.2});
  auto r2 = fixed(eq, {0.2, 0.2, 0.0});
  EXPECT_EQ(select_ogss_topk_shield(eq, r2, 2).move, uci("a2a3"));
}

TEST(RiskSourceTest, LazyAndBatched) {
  const std::vector<MoveCode> moves{uci("a2a3"), uci("b2b3")};
  int calls = 0;
  RiskSource lazy(moves, RiskSource::PerMove([&](const MoveCode&) {
                    ++calls;
                    return 0.25;
                  }));
  EXPECT_EQ(lazy.at(1), 0.25);
  EXPECT_EQ(lazy.at(1), 0.25);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(lazy.queries(), 1u);
  int batches = 0;
  RiskSource batched(moves, RiskSource::Batch([&](std::span<const MoveCode> ms) {
                       ++batches;
                       return std::vector<double>(ms.size(), 0.5);
                     }));
  batched.at(0);
  batched.at(1);
  EXPECT_EQ(batches, 1);
  EXPECT_EQ(batched.queries(), 2u);
}

constexpr int kCases = 10000;

TEST(Properties, EveryStrategyReturnsLegalMoveAndValidCount) {
  Rng gen(100);
  const std::vector<StrategyConfig> cfgs = {
      StrategyConfig::random(), StrategyConfig::greedy(), StrategyConfig::top_k(3),
      StrategyConfig::top_k(5), StrategyConfig::with_temperature(0.5), StrategyConfig::with_temperature(1.5),
      StrategyConfig::entropy_filter(2.0), StrategyConfig::entropy_filter(4.0), StrategyConfig::action_pruning(),
      StrategyConfig::ogss_elimination(), StrategyConfig::ogss_utility(), StrategyConfig::ogss_topk_shield(3),
      StrategyConfig::ogss_topk_shield(5)};
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    const auto& cfg = cfgs[static_cast<std::size_t>(t) % cfgs.size()];
    RiskSource risk(c.conf.moves, c.risk);
    Rng rng(static_cast<std::uint64_t>(t));
    const auto r = select(cfg, c.conf, &risk, rng);
    ASSERT_LT(index_of(c.conf, r.move), c.conf.size());
    ASSERT_GE(r.considered_count, 1);
    ASSERT_LE(r.considered_count, static_cast<int>(c.conf.size()));
  }
}

TEST(Properties, EliminationRespectsDelta) {
  Rng gen(101);
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    const double delta = static_cast<double>(gen.uniform_index(11)) / 10.0;
    RiskSource risk(c.conf.moves, c.risk);
    const auto r = select_ogss_elimination(c.conf, risk, delta);
    const std::size_t i = index_of(c.conf, r.move);
    if (!r.fallback_used) {
      ASSERT_LE(c.risk[i], delta);
      ASSERT_EQ(risk.queries(), static_cast<std::size_t>(r.considered_count));
      // No higher-ranked move was admissible.
      const auto ranked = rank_by_confidence(c.conf);
      for (int k = 0; k + 1 < r.considered_count; ++k) ASSERT_GT(c.risk[ranked[k]], delta);
    } else {
      ASSERT_EQ(i, greedy_index(c.conf));
      for (double v : c.risk) ASSERT_GT(v, delta);
    }
  }
}

TEST(Properties, UtilityReductions) {
  Rng gen(102);
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    RiskSource r1(c.conf.moves, c.risk);
    ASSERT_EQ(index_of(c.conf, select_ogss_utility(c.conf, r1, 1.0).move), greedy_index(c.conf));
    RiskSource r0(c.conf.moves, c.risk);
    const std::size_t argmin = static_cast<std::size_t>(std::min_element(c.risk.begin(), c.risk.end()) - c.risk.begin());
    ASSERT_EQ(index_of(c.conf, select_ogss_utility(c.conf, r0, 0.0).move), argmin);
  }
}

TEST(Properties, UtilityMonotoneInRisk) {
  Rng gen(103);
  for (int t = 0; t < kCases; ++t) {
    auto c = random_case(gen);
    const double alpha = gen.uniform01();
    RiskSource before(c.conf.moves, c.risk);
    const auto a = select_ogss_utility(c.conf, before, alpha);
    const std::size_t j = static_cast<std::size_t>(gen.uniform_index(c.conf.size()));
    auto lowered = c.risk;
    lowered[j] = std::max(0.0, lowered[j] - 0.1 - 0.5 * gen.uniform01());
    RiskSource after(c.conf.moves, lowered);
    const auto b = select_ogss_utility(c.conf, after, alpha);
    ASSERT_GE(*b.diagnostics[j].utility, *a.diagnostics[j].utility);
    // The previously chosen move can only lose to the improved one.
    const std::size_t ia = index_of(c.conf, a.move);
    const std::size_t ib = index_of(c.conf, b.move);
    ASSERT_TRUE(ib == ia || ib == j);
  }
}

TEST(Properties, ScaleInvarianceOfRankDecisions) {
  Rng gen(104);
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    const double scale = std::ldexp(1.0, static_cast<int>(gen.uniform_index(20)) - 10);
    ConfidenceMap scaled = c.conf;
    double total = 0;
    for (auto& v : scaled.conf) total += (v *= scale);
    for (auto& v : scaled.conf) v /= total;
    ASSERT_EQ(greedy_index(c.conf), greedy_index(scaled));
    Rng a(1), b(1);
    ASSERT_EQ(select(StrategyConfig::greedy(), c.conf, nullptr, a).move,
              select(StrategyConfig::greedy(), scaled, nullptr, b).move);
    auto ra = rank_by_confidence(c.conf);
    auto rb = rank_by_confidence(scaled);
    ra.resize(std::min<std::size_t>(3, ra.size()));
    rb.resize(std::min<std::size_t>(3, rb.size()));
    ASSERT_EQ(ra, rb);
    RiskSource r1(c.conf.moves, c.risk), r2(c.conf.moves, c.risk);
    ASSERT_EQ(select_ogss_elimination(c.conf, r1, 0.3).move, select_ogss_elimination(scaled, r2, 0.3).move);
  }
}

TEST(Properties, PruningSetExcludesRiskyMoves) {
  Rng gen(105);
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    RiskSource risk(c.conf.moves, c.risk);
    Rng rng(static_cast<std::uint64_t>(t));
    const auto r = select(StrategyConfig::action_pruning(0.5), c.conf, &risk, rng);
    const std::size_t kept = static_cast<std::size_t>(std::count_if(c.risk.begin(), c.risk.end(), [](double v) { return v <= 0.5; }));
    if (r.fallback_used) {
      ASSERT_EQ(kept, 0u);
    } else {
      ASSERT_LE(c.risk[index_of(c.conf, r.move)], 0.5);
      ASSERT_EQ(static_cast<std::size_t>(r.considered_count), kept);
    }
  }
}

TEST(Properties, StochasticStrategiesAreDeterministicUnderSeed) {
  Rng gen(106);
  const std::vector<StrategyConfig> cfgs = {StrategyConfig::random(), StrategyConfig::top_k(5),
                                            StrategyConfig::with_temperature(1.5), StrategyConfig::entropy_filter(4.0),
                                            StrategyConfig::action_pruning()};
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    const auto& cfg = cfgs[static_cast<std::size_t>(t) % cfgs.size()];
    RiskSource r1(c.conf.moves, c.risk), r2(c.conf.moves, c.risk);
    Rng a(static_cast<std::uint64_t>(t) * 7), b(static_cast<std::uint64_t>(t) * 7);
    const auto x = select(cfg, c.conf, &r1, a);
    const auto y = select(cfg, c.conf, &r2, b);
    ASSERT_EQ(x.move, y.move);
    ASSERT_EQ(x.considered_count, y.considered_count);
    ASSERT_EQ(x.fallback_used, y.fallback_used);
  }
}

TEST(Properties, ShieldPicksMinimumRiskInsideTopK) {
  Rng gen(107);
  for (int t = 0; t < kCases; ++t) {
    const auto c = random_case(gen);
    const int k = 1 + static_cast<int>(gen.uniform_index(6));
    RiskSource risk(c.conf.moves, c.risk);
    const auto r = select_ogss_topk_shield(c.conf, risk, k);
    const auto ranked = rank_by_confidence(c.conf);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    double lo = 2;
    for (std::size_t i = 0; i < top; ++i) lo = std::min(lo, c.risk[ranked[i]]);
    const std::size_t chosen = index_of(c.conf, r.move);
    ASSERT_EQ(c.risk[chosen], lo);
    ASSERT_NE(std::find(ranked.begin(), ranked.begin() + static_cast<long>(top), chosen), ranked.begin() + static_cast<long>(top));
    ASSERT_EQ(risk.queries(), top);
    if (k == 1) ASSERT_EQ(chosen, greedy_index(c.conf));
  }
}

}  // namespace
}  // namespace ogss::selection
