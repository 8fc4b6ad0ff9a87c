#pragma once

#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ogss/chess/board.hpp"
#include "ogss/util/error.hpp"

namespace ogss::oracle {

inline constexpr int kMateScore = 10000;
inline constexpr int kDefaultBlunderThreshold = 100;

// Centipawns from the perspective of the side to move in the evaluated
// position. Mate scores are mapped to sign(k) * (10000 - |k|).
struct CentipawnScore {
  int value = 0;
  bool is_mate_mapped = false;

  bool operator==(const CentipawnScore&) const = default;
};

int map_mate(int moves_to_mate);

struct OracleLimits {
  enum class Mode { Depth, MoveTime };
  Mode mode = Mode::Depth;
  int depth = 8;
  int movetime_ms = 100;

  static OracleLimits at_depth(int plies) { return {Mode::Depth, plies, 100}; }
  static OracleLimits at_movetime(int ms) { return {Mode::MoveTime, 8, ms}; }

  // Throws ConfigError when depth < 1 (Depth) or movetime < 10 (MoveTime).
  void validate() const;
  std::string go_command() const;
  std::string describe() const;
};

struct SearchResult {
  CentipawnScore score;
  std::optional<chess::MoveCode> best_move;
};

class OracleError : public Error {
 public:
  enum class Kind { Spawn, Timeout, Protocol, Desync, NoMove };
  OracleError(Kind kind, const std::string& operation, const std::string& message)
      : Error("oracle_client", operation, message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// One handle = one evaluator with single-threaded command/response use.
class Oracle {
 public:
  virtual ~Oracle() = default;

  // Searches a non-terminal position.
  virtual SearchResult search(const chess::BoardState& state, const OracleLimits& limits) = 0;
  virtual void new_game() {}
  virtual std::string identity() const = 0;
};

using OracleFactory = std::function<std::unique_ptr<Oracle>()>;

// Terminal positions short-circuit: checkmate -> -10000, stalemate -> 0.
CentipawnScore evaluate(Oracle& oracle, const chess::BoardState& state, const OracleLimits& limits);

// Throws OracleError(NoMove) for terminal positions.
chess::MoveCode best_move(Oracle& oracle, const chess::BoardState& state, const OracleLimits& limits);

// Oracle verdict for one (state, move). Scores are in the mover's frame.
struct BlunderLabel {
  CentipawnScore eval_before;
  CentipawnScore eval_after;
  int drop = 0;
  bool is_blunder = false;
  std::optional<chess::MoveCode> correction;

  bool operator==(const BlunderLabel&) const = default;
};

// Threshold rule over two mover-frame scores.
BlunderLabel make_label(CentipawnScore before, CentipawnScore after,
                        std::optional<chess::MoveCode> correction,
                        int threshold = kDefaultBlunderThreshold);

BlunderLabel label_move(Oracle& oracle, const chess::BoardState& state, const chess::MoveCode& move,
                        const OracleLimits& limits, int threshold = kDefaultBlunderThreshold);

// Hands out handles exclusively; a lease returns its handle on destruction.
class OraclePool {
 public:
  OraclePool(const OracleFactory& factory, std::size_t size);

  class Lease {
   public:
    Lease(OraclePool& pool, std::size_t slot) : pool_(&pool), slot_(slot) {}
    Lease(Lease&& other) noexcept : pool_(other.pool_), slot_(other.slot_) { other.pool_ = nullptr; }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    Lease& operator=(Lease&&) = delete;
    ~Lease();

    Oracle& operator*() const { return *pool_->handles_[slot_]; }
    Oracle* operator->() const { return pool_->handles_[slot_].get(); }

   private:
    OraclePool* pool_;
    std::size_t slot_;
  };

  Lease acquire();
  std::size_t size() const { return handles_.size(); }

 private:
  std::vector<std::unique_ptr<Oracle>> handles_;
  std::vector<bool> busy_;
  std::mutex mutex_;
  std::condition_variable released_;
};

}  // namespace ogss::oracle
