#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "ogss/oracle/oracle.hpp"

namespace ogss::oracle {

// Child process with line-oriented pipes on stdin/stdout.
class Subprocess {
 public:
  Subprocess() = default;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  // Throws OracleError(Spawn) if the executable cannot be started.
  void spawn(const std::string& path, const std::vector<std::string>& args);
  bool running() const { return pid_ > 0; }

  // Returns false if the pipe is closed.
  bool write_line(const std::string& line);

  // Next line without the trailing newline; nullopt on timeout or EOF (see eof()).
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  bool eof() const { return eof_; }

  // Closes the pipes, waits briefly, then kills the child.
  void terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(500));

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

struct EngineOptions {
  std::string path;
  std::vector<std::string> args;
  std::chrono::milliseconds handshake_timeout{5000};
  // Deadline for a depth-limited search. MoveTime searches use
  // movetime * movetime_safety_factor + 1000 ms.
  std::chrono::milliseconds depth_search_timeout{60000};
  int movetime_safety_factor = 10;
};

// UCI client. Sends "uci"/"isready" on start, "position fen" + "go" per
// search, and "quit" on destruction. A search that desyncs (timeout, EOF, no
// bestmove) restarts the session once and is retried before failing.
class UciEngine final : public Oracle {
 public:
  explicit UciEngine(EngineOptions options);
  ~UciEngine() override;

  SearchResult search(const chess::BoardState& state, const OracleLimits& limits) override;
  void new_game() override;
  std::string identity() const override { return identity_; }

  // "isready" round trip.
  bool ping();
  int restarts() const { return restarts_; }

 private:
  void start();
  void wait_for(const std::string& token, std::chrono::milliseconds timeout, const char* operation);
  SearchResult search_once(const chess::BoardState& state, const OracleLimits& limits);

  EngineOptions options_;
  Subprocess process_;
  std::string identity_;
  int restarts_ = 0;
};

OracleFactory uci_engine_factory(EngineOptions options);

}  // namespace ogss::oracle
