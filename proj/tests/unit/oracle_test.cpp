#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <climits>
#include <filesystem>

#include "ogss/oracle/mock_oracle.hpp"
#include "ogss/oracle/uci_engine.hpp"
#include "ogss/oracle/uci_protocol.hpp"
#include "positions.hpp"

namespace ogss::oracle {
namespace {

using chess::BoardState;
using chess::MoveCode;
using chess::parse_fen;
using namespace std::chrono_literals;

MoveCode uci(std::string_view text) { return *MoveCode::parse_uci(text); }

const OracleLimits kLimits = OracleLimits::at_depth(8);

TEST(MateMapping, Examples) {
  EXPECT_EQ(map_mate(3), 9997);
  EXPECT_EQ(map_mate(-3), -9997);
  EXPECT_EQ(map_mate(1), 9999);
  EXPECT_EQ(map_mate(0), -10000);
}

TEST(Limits, ValidationAndCommands) {
  EXPECT_THROW(OracleLimits::at_depth(0).validate(), ConfigError);
  EXPECT_THROW(OracleLimits::at_movetime(9).validate(), ConfigError);
  EXPECT_NO_THROW(OracleLimits::at_movetime(10).validate());
  EXPECT_EQ(OracleLimits::at_depth(6).go_command(), "go depth 6");
  EXPECT_EQ(OracleLimits::at_movetime(250).go_command(), "go movetime 250");
}

TEST(InfoParser, CentipawnAndMate) {
  EXPECT_EQ(parse_info_score("info depth 8 score cp 37 nodes 100 pv e2e4"), (CentipawnScore{37, false}));
  EXPECT_EQ(parse_info_score("info depth 8 score mate 3 nodes 5"), (CentipawnScore{9997, true}));
  EXPECT_EQ(parse_info_score("info depth 8 score mate -2"), (CentipawnScore{-9998, true}));
  EXPECT_EQ(parse_info_score("info score cp 25000"), (CentipawnScore{10000, false}));
  EXPECT_EQ(parse_info_score("info score cp -25000"), (CentipawnScore{-10000, false}));
  EXPECT_EQ(parse_info_score("info depth 3 score cp 12 lowerbound"), (CentipawnScore{12, false}));
}

TEST(InfoParser, LinesWithoutUsableScore) {
  EXPECT_FALSE(parse_info_score("info string score cp 500"));
  EXPECT_FALSE(parse_info_score("info depth 2 pv e2e4 score cp 1"));
  EXPECT_FALSE(parse_info_score("info depth 2 currmove e2e4"));
  EXPECT_FALSE(parse_info_score("info score"));
  EXPECT_FALSE(parse_info_score("info score cp"));
  EXPECT_FALSE(parse_info_score("info score cp abc"));
  EXPECT_FALSE(parse_info_score("info score wdl 1 2"));
  EXPECT_FALSE(parse_info_score("bestmove e2e4"));
  EXPECT_FALSE(parse_info_score(""));
}

TEST(BestmoveParser, Tokens) {
  EXPECT_EQ(parse_bestmove("bestmove e2e4 ponder e7e5"), "e2e4");
  EXPECT_EQ(parse_bestmove("bestmove (none)"), "(none)");
  EXPECT_FALSE(parse_bestmove("bestmove"));
  EXPECT_FALSE(parse_bestmove("info bestmove e2e4"));
}

TEST(Transcript, LastScoreBeforeBestmoveWins) {
  SearchTranscript t;
  EXPECT_FALSE(t.feed("info depth 1 score cp 10"));
  EXPECT_FALSE(t.feed("info depth 2 score cp 30"));
  EXPECT_FALSE(t.feed("info string hello"));
  EXPECT_TRUE(t.feed("bestmove e2e4"));
  EXPECT_TRUE(t.feed("info depth 3 score cp 99"));
  const auto r = t.result(BoardState::startpos());
  EXPECT_EQ(r.score.value, 30);
  EXPECT_EQ(r.best_move, uci("e2e4"));
}

TEST(Transcript, InterleavedInfoOrderNeverChangesScore) {
  const std::vector<std::string> noise = {"info string score cp 1", "info nodes 10 nps 20",
                                          "info depth 9 currmove g1f3", "info hashfull 3",
                                          "info string bestmove a1a1"};
  ogss::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> lines = noise;
    rng.shuffle(std::span<std::string>(lines));
    lines.insert(lines.begin() + static_cast<long>(rng.uniform_index(lines.size() + 1)),
                 "info depth 5 score cp -44 pv e2e4");
    // Noise may only follow the score line; the score is still the last one.
    SearchTranscript t;
    for (const auto& l : lines) t.feed(l);
    t.feed("bestmove e2e4");
    EXPECT_EQ(t.result(BoardState::startpos()).score.value, -44);
  }
}

TEST(Transcript, Errors) {
  {
    SearchTranscript t;
    t.feed("info score cp 1");
    try {
      t.result(BoardState::startpos());
      FAIL();
    } catch (const OracleError& e) {
      EXPECT_EQ(e.kind(), OracleError::Kind::Desync);
    }
  }
  {
    SearchTranscript t;
    t.feed("bestmove e2e4");
    try {
      t.result(BoardState::startpos());
      FAIL();
    } catch (const OracleError& e) {
      EXPECT_EQ(e.kind(), OracleError::Kind::Protocol);
    }
  }
  {
    SearchTranscript t;
    t.feed("info score cp 1");
    t.feed("bestmove e2e5");
    try {
      t.result(BoardState::startpos());
      FAIL();
    } catch (const OracleError& e) {
      EXPECT_EQ(e.kind(), OracleError::Kind::Protocol);
    }
  }
  {
    SearchTranscript t;
    t.feed("bestmove (none)");
    EXPECT_FALSE(t.result(parse_fen("k7/1Q6/1K6/8/8/8/8/8 b - - 0 1")).best_move);
  }
}

TEST(MockOracle, Startpos) {
  MockOracle oracle;
  const auto a = oracle.search(BoardState::startpos(), kLimits);
  EXPECT_EQ(a.score.value, 0);
  EXPECT_EQ(a.best_move, uci("b1a3"));
  const auto b = oracle.search(BoardState::startpos(), kLimits);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(a.best_move, b.best_move);
  EXPECT_EQ(evaluate(oracle, BoardState::startpos(), kLimits).value, 0);
}

TEST(MockQuiescence, Examples) {
  MockOracle q(false, true);
  EXPECT_EQ(q.identity(), "mock-material-q");
  EXPECT_EQ(MockOracle(true, true).identity(), "mock-material-pst-q");
  const auto start = q.search(BoardState::startpos(), kLimits);
  EXPECT_EQ(start.score.value, 0);
  EXPECT_EQ(start.best_move, uci("b1a3"));
  // Pawn trade: the recapture is seen, so winning the pawn nets +100.
  EXPECT_EQ(evaluate(q, parse_fen("4k3/8/8/3p4/4P3/8/8/4K3 w - - 0 1"), kLimits).value, 100);
  EXPECT_EQ(evaluate(q, parse_fen("4k3/8/2n5/3p4/4P3/8/8/4K3 w - - 0 1"), kLimits).value, -200);
  EXPECT_EQ(evaluate(q, parse_fen("4k3/8/8/8/8/8/r7/R3K3 w - - 0 1"), kLimits).value, 500);
}

TEST(MockQuiescence, LabelsSeeRecaptures) {
  MockOracle q(false, true);
  const auto italian = parse_fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3");
  const auto nxe5 = label_move(q, italian, uci("f3e5"), kLimits);
  EXPECT_EQ(nxe5.eval_before.value, 0);
  EXPECT_EQ(nxe5.eval_after.value, -200);
  EXPECT_EQ(nxe5.drop, 200);
  EXPECT_TRUE(nxe5.is_blunder);
  EXPECT_EQ(nxe5.correction, uci("b1a3"));
  const auto bc4 = label_move(q, italian, uci("f1c4"), kLimits);
  EXPECT_EQ(bc4.drop, 0);
  EXPECT_FALSE(bc4.is_blunder);
  // Taking a defended pawn with a pawn is an even trade.
  EXPECT_EQ(label_move(q, parse_fen("4k3/8/2n5/3p4/4P3/8/8/4K3 w - - 0 1"), uci("e4d5"), kLimits).drop, 0);
}

// Unpruned negamax over captures and promotions with stand-pat.
int brute_quiesce(const BoardState& s, int depth) {
  int best = static_eval(s, false);
  if (depth == 0) return best;
  for (const auto& m : chess::legal_moves(s)) {
    const bool ep = s.en_passant() && *s.en_passant() == m.to && chess::type_of(s.at(m.from)) == chess::PieceType::Pawn;
    if (s.at(m.to) == chess::Piece::None && !ep && m.promotion == chess::Promotion::None) continue;
    best = std::max(best, -brute_quiesce(chess::apply_move_unchecked(s, m), depth - 1));
  }
  return best;
}

TEST(MockQuiescence, MatchesUnprunedSearch) {
  MockOracle q(false, true);
  for (const auto& s : ogss::testing::random_positions(12, 77, 60)) {
    const auto legal = chess::legal_moves(s);
    if (legal.empty()) continue;
    int expected = INT_MIN;
    for (const auto& m : legal) {
      const auto child = chess::apply_move_unchecked(s, m);
      int v;
      if (chess::legal_moves(child).empty())
        v = child.in_check() ? map_mate(1) : 0;
      else
        v = -brute_quiesce(child, MockOracle::kQuiescenceDepth);
      expected = std::max(expected, v);
    }
    EXPECT_EQ(q.search(s, kLimits).score.value, expected) << chess::to_fen(s);
  }
}

TEST(MockOracle, QueenUp) {
  MockOracle oracle;
  EXPECT_EQ(evaluate(oracle, parse_fen("k7/8/8/8/8/8/8/KQ6 w - - 0 1"), kLimits).value, 900);
}

TEST(MockOracle, HangingRookSwing) {
  MockOracle oracle;
  const BoardState s = parse_fen("4k3/8/8/8/8/8/r7/R3K3 w - - 0 1");
  EXPECT_EQ(static_eval(s, false), 0);
  const auto r = oracle.search(s, kLimits);
  EXPECT_EQ(r.score.value, 500);
  EXPECT_EQ(r.best_move, uci("a1a2"));
}

TEST(MockOracle, FreeQueenCapture) {
  MockOracle oracle;
  EXPECT_EQ(best_move(oracle, parse_fen("4k3/8/8/3q4/8/8/8/3RK3 w - - 0 1"), kLimits), uci("d1d5"));
}

TEST(MockOracle, SingleLegalMove) {
  MockOracle oracle;
  EXPECT_EQ(best_move(oracle, parse_fen("k7/8/8/8/8/8/1q6/K7 w - - 0 1"), kLimits), uci("a1b2"));
}

TEST(MockOracle, TerminalPositions) {
  MockOracle oracle;
  const BoardState mated = parse_fen("k7/1Q6/1K6/8/8/8/8/8 b - - 0 1");
  try {
    best_move(oracle, mated, kLimits);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::NoMove);
  }
  EXPECT_EQ(evaluate(oracle, mated, kLimits).value, -10000);
  EXPECT_EQ(evaluate(oracle, parse_fen("k7/8/1Q6/8/8/8/8/K7 b - - 0 1"), kLimits).value, 0);
}

TEST(MockOracle, MateInOneScoresAsMate) {
  MockOracle oracle;
  const auto r = oracle.search(parse_fen("k7/8/1K6/8/8/8/7Q/8 w - - 0 1"), kLimits);
  EXPECT_EQ(r.score.value, 9999);
  const BoardState after = chess::apply_move(parse_fen("k7/8/1K6/8/8/8/7Q/8 w - - 0 1"), *r.best_move);
  EXPECT_TRUE(chess::is_checkmate(after));
}

TEST(Label, ThresholdRule) {
  const auto a = make_label({150, false}, {30, false}, std::nullopt);
  EXPECT_EQ(a.drop, 120);
  EXPECT_TRUE(a.is_blunder);
  const auto b = make_label({150, false}, {51, false}, std::nullopt);
  EXPECT_EQ(b.drop, 99);
  EXPECT_FALSE(b.is_blunder);
  EXPECT_TRUE(make_label({150, false}, {50, false}, std::nullopt).is_blunder);
}

TEST(Label, HangingQueen) {
  MockOracle oracle;
  const BoardState s = parse_fen("3rk3/8/8/8/8/8/8/3QK3 w - - 0 1");
  const auto label = label_move(oracle, s, uci("d1d7"), kLimits);
  EXPECT_EQ(label.eval_before.value, 900);
  EXPECT_EQ(label.eval_after.value, -500);
  EXPECT_EQ(label.drop, 1400);
  EXPECT_TRUE(label.is_blunder);
  EXPECT_EQ(label.correction, uci("d1d8"));
}

// Independent 1-ply recomputation straight from the material count.
int brute_search(const BoardState& s) {
  int best = -1000000;
  for (const auto& m : chess::legal_moves(s)) {
    const BoardState n = chess::apply_move(s, m);
    int v;
    if (chess::is_checkmate(n)) v = 9999;
    else if (chess::is_stalemate(n)) v = 0;
    else v = -static_eval(n, false);
    best = std::max(best, v);
  }
  return best;
}

int brute_eval(const BoardState& s) {
  if (chess::is_checkmate(s)) return -10000;
  if (chess::is_stalemate(s)) return 0;
  return brute_search(s);
}

TEST(Properties, DropMatchesBruteForceAndThreshold) {
  MockOracle oracle;
  int checked = 0;
  for (const auto& s : testing::random_positions(60, 21)) {
    const auto moves = chess::legal_moves(s);
    if (moves.empty()) continue;
    for (std::size_t i = 0; i < moves.size(); i += 3) {
      const auto label = label_move(oracle, s, moves[i], kLimits);
      const int expected = brute_search(s) + brute_eval(chess::apply_move(s, moves[i]));
      EXPECT_EQ(label.drop, expected);
      EXPECT_EQ(label.is_blunder, label.drop >= 100);
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(Pool, LeasesAreExclusive) {
  OraclePool pool(mock_oracle_factory(), 2);
  auto a = pool.acquire();
  auto b = pool.acquire();
  EXPECT_NE(&*a, &*b);
  Oracle* first = &*a;
  { auto moved = std::move(a); }
  auto c = pool.acquire();
  EXPECT_EQ(&*c, first);
}

class FakeEngine : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ogss-oracle-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  EngineOptions options(std::vector<std::string> args = {}) const {
    EngineOptions o;
    o.path = OGSS_FAKE_ENGINE;
    o.args = std::move(args);
    o.handshake_timeout = 2000ms;
    o.depth_search_timeout = 2000ms;
    return o;
  }
  std::string marker() const { return (dir_ / "marker").string(); }

  std::filesystem::path dir_;
};

TEST_F(FakeEngine, HandshakeAndPing) {
  UciEngine engine(options());
  EXPECT_EQ(engine.identity(), "FakeEngine 1.0");
  EXPECT_TRUE(engine.ping());
  engine.new_game();
  EXPECT_TRUE(engine.ping());
}

TEST_F(FakeEngine, AgreesWithMockOracle) {
  UciEngine engine(options({"--noise", "--bounds"}));
  MockOracle mock;
  for (const auto& s : testing::random_positions(40, 3)) {
    if (chess::legal_moves(s).empty()) continue;
    const auto a = engine.search(s, kLimits);
    const auto b = mock.search(s, kLimits);
    EXPECT_EQ(a.score.value, b.score.value);
    EXPECT_EQ(a.best_move, b.best_move);
  }
  EXPECT_EQ(engine.restarts(), 0);
}

TEST_F(FakeEngine, MateScoreMapped) {
  UciEngine engine(options({"--mate", "3"}));
  EXPECT_EQ(evaluate(engine, BoardState::startpos(), kLimits).value, 9997);
}

TEST_F(FakeEngine, NonexistentPathIsSpawnError) {
  EngineOptions o = options();
  o.path = "/nonexistent/engine";
  try {
    UciEngine engine(o);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::Spawn);
  }
}

TEST_F(FakeEngine, MissingUciokTimesOut) {
  EngineOptions o = options({"--no-uciok"});
  o.handshake_timeout = 300ms;
  try {
    UciEngine engine(o);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::Timeout);
  }
}

TEST_F(FakeEngine, CrashRestartsOnceAndStaysDeterministic) {
  UciEngine engine(options({"--crash-once", marker()}));
  MockOracle mock;
  const BoardState s = parse_fen("4k3/8/8/3q4/8/8/8/3RK3 w - - 0 1");
  const auto r = engine.search(s, kLimits);
  EXPECT_EQ(engine.restarts(), 1);
  EXPECT_EQ(r.best_move, mock.search(s, kLimits).best_move);
  EXPECT_EQ(r.score, mock.search(s, kLimits).score);
  EXPECT_EQ(engine.search(s, kLimits).score, r.score);
  EXPECT_EQ(engine.restarts(), 1);
}

TEST_F(FakeEngine, HangRestartsOnce) {
  EngineOptions o = options({"--hang-once", marker()});
  o.depth_search_timeout = 300ms;
  UciEngine engine(o);
  const auto r = engine.search(BoardState::startpos(), kLimits);
  EXPECT_EQ(engine.restarts(), 1);
  EXPECT_EQ(r.score.value, 0);
}

TEST_F(FakeEngine, PersistentHangFailsAfterOneRestart) {
  EngineOptions o = options({"--hang"});
  o.depth_search_timeout = 200ms;
  UciEngine engine(o);
  try {
    engine.search(BoardState::startpos(), kLimits);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::Desync);
  }
  EXPECT_EQ(engine.restarts(), 1);
}

TEST_F(FakeEngine, IllegalBestmoveIsProtocolError) {
  UciEngine engine(options({"--illegal"}));
  try {
    engine.search(BoardState::startpos(), kLimits);
    FAIL();
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::Protocol);
  }
}

TEST_F(FakeEngine, MissingScoreIsProtocolError) {
  UciEngine engine(options({"--no-score"}));
  EXPECT_THROW(engine.search(BoardState::startpos(), kLimits), OracleError);
}

TEST_F(FakeEngine, MoveTimeLimitsAccepted) {
  UciEngine engine(options());
  EXPECT_EQ(engine.search(BoardState::startpos(), OracleLimits::at_movetime(10)).score.value, 0);
  EXPECT_THROW(engine.search(BoardState::startpos(), OracleLimits::at_movetime(5)), ConfigError);
}

}  // namespace
}  // namespace ogss::oracle
