#include "ogss/oracle/oracle.hpp"

#include <algorithm>
#include <cstdlib>

namespace ogss::oracle {

int map_mate(int moves_to_mate) {
  if (moves_to_mate == 0) return -kMateScore;  // side to move is mated
  const int plies = std::min(std::abs(moves_to_mate), kMateScore);
  return moves_to_mate > 0 ? kMateScore - plies : -(kMateScore - plies);
}

void OracleLimits::validate() const {
  if (mode == Mode::Depth && depth < 1)
    throw ConfigError("oracle_client", "limits", "depth must be >= 1");
  if (mode == Mode::MoveTime && movetime_ms < 10)
    throw ConfigError("oracle_client", "limits", "movetime must be >= 10 ms");
}

std::string OracleLimits::go_command() const {
  return mode == Mode::Depth ? "go depth " + std::to_string(depth)
                             : "go movetime " + std::to_string(movetime_ms);
}

std::string OracleLimits::describe() const {
  return mode == Mode::Depth ? "depth " + std::to_string(depth)
                             : "movetime " + std::to_string(movetime_ms);
}

CentipawnScore evaluate(Oracle& oracle, const chess::BoardState& state, const OracleLimits& limits) {
  if (chess::legal_moves(state).empty())
    return state.in_check() ? CentipawnScore{-kMateScore, true} : CentipawnScore{0, false};
  return oracle.search(state, limits).score;
}

chess::MoveCode best_move(Oracle& oracle, const chess::BoardState& state, const OracleLimits& limits) {
  if (chess::legal_moves(state).empty())
    throw OracleError(OracleError::Kind::NoMove, "best_move",
                      "no legal move in " + chess::to_fen(state));
  auto result = oracle.search(state, limits);
  if (!result.best_move)
    throw OracleError(OracleError::Kind::NoMove, "best_move", "oracle returned no move");
  return *result.best_move;
}

BlunderLabel make_label(CentipawnScore before, CentipawnScore after,
                        std::optional<chess::MoveCode> correction, int threshold) {
  BlunderLabel label;
  label.eval_before = before;
  label.eval_after = after;
  label.drop = before.value - after.value;
  label.is_blunder = label.drop >= threshold;
  label.correction = correction;
  return label;
}

BlunderLabel label_move(Oracle& oracle, const chess::BoardState& state, const chess::MoveCode& move,
                        const OracleLimits& limits, int threshold) {
  const chess::BoardState after = chess::apply_move(state, move);
  const SearchResult before = oracle.search(state, limits);
  const CentipawnScore reply = evaluate(oracle, after, limits);
  return make_label(before.score, {-reply.value, reply.is_mate_mapped}, before.best_move, threshold);
}

OraclePool::OraclePool(const OracleFactory& factory, std::size_t size) {
  for (std::size_t i = 0; i < std::max<std::size_t>(size, 1); ++i) handles_.push_back(factory());
  busy_.assign(handles_.size(), false);
}

OraclePool::Lease OraclePool::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    for (std::size_t i = 0; i < busy_.size(); ++i) {
      if (!busy_[i]) {
        busy_[i] = true;
        return Lease(*this, i);
      }
    }
    released_.wait(lock);
  }
}

OraclePool::Lease::~Lease() {
  if (!pool_) return;
  {
    std::lock_guard lock(pool_->mutex_);
    pool_->busy_[slot_] = false;
  }
  pool_->released_.notify_one();
}

}  // namespace ogss::oracle
