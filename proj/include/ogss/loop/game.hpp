#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ogss/models/blunder.hpp"
#include "ogss/models/policy.hpp"
#include "ogss/oracle/oracle.hpp"
#include "ogss/selection/selection.hpp"

namespace ogss::loop {

enum class Outcome { AgentWin, AgentLoss, Draw, Adjudicated };
enum class Termination { Checkmate, Stalemate, FiftyMove, Threefold, InsufficientMaterial, MaxPlies, Error };

std::string to_string(Outcome o);
std::string to_string(Termination t);
Outcome parse_outcome(const std::string& text);
Termination parse_termination(const std::string& text);

struct Ply {
  chess::BoardState before;
  chess::MoveCode played;
  bool agent = false;
  // Agent plies only.
  std::optional<selection::SelectionResult> selection;
  std::optional<oracle::BlunderLabel> label;
};

struct GameRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string strategy;  // StrategyConfig::label()
  chess::Color agent_color = chess::Color::White;
  chess::BoardState start = chess::BoardState::startpos();
  std::vector<Ply> plies;
  Outcome outcome = Outcome::Draw;
  Termination termination = Termination::MaxPlies;
  // Labeler score of the final position in the agent's frame (Adjudicated).
  std::optional<int> final_eval;
  // Set when an oracle failed mid-game; plies hold everything played so far.
  std::optional<std::string> error;

  std::size_t agent_moves() const;
  std::size_t blunders() const;
};

// Where Risk(m) comes from during play.
enum class RiskMode {
  Model,        // blunder model sigmoid output
  OracleTruth,  // 1 if the labeler flags the move as a blunder, else 0
};

struct Agent {
  const models::PolicyModel* policy = nullptr;
  const models::BlunderModel* blunder = nullptr;  // required for RiskMode::Model with risk strategies
  RiskMode risk_mode = RiskMode::Model;
  selection::StrategyConfig strategy;
};

struct GameOptions {
  int max_plies = 200;
  // Uniformly random plies (both sides) played before recording starts, so
  // deterministic strategies still see different games.
  int opening_plies = 4;
  oracle::OracleLimits opponent_limits;
  oracle::OracleLimits label_limits;
  int blunder_threshold = oracle::kDefaultBlunderThreshold;

  void validate() const;
};

// Odd-indexed games put the agent on White, even-indexed on Black.
chess::Color agent_color_for(std::size_t game_index);

// Plays one game. Agent moves come from the strategy and are labeled by
// `labeler`; replies are the opponent's best moves. Randomness (openings and
// stochastic strategies) derives from `seed` only. Oracle failures end the
// game with `error` set instead of throwing.
GameRecord play_game(const Agent& agent, oracle::Oracle& opponent, oracle::Oracle& labeler, const GameOptions& opts,
                     std::size_t game_index, std::uint64_t seed);

// Per-game seed for game `index` of a run seeded with `run_seed`.
std::uint64_t game_seed(std::uint64_t run_seed, std::size_t index);

// Plays games [0, n) with up to `jobs` concurrent games; each worker owns
// oracle handles built from the factories. Output is in game order and does
// not depend on `jobs`.
std::vector<GameRecord> play_games(const Agent& agent, const oracle::OracleFactory& opponent,
                                   const oracle::OracleFactory& labeler, const GameOptions& opts, std::size_t n,
                                   std::uint64_t run_seed, int jobs = 1);

// Replays the plies from the start position; throws IllegalMoveError on the
// first illegal move and Error if a stored `before` disagrees.
void verify_replay(const GameRecord& record);

}  // namespace ogss::loop
