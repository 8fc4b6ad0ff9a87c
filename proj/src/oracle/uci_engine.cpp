#include "ogss/oracle/uci_engine.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <spdlog/spdlog.h>

#include "ogss/oracle/uci_protocol.hpp"

namespace ogss::oracle {

namespace {

using Clock = std::chrono::steady_clock;

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

Subprocess::~Subprocess() { terminate(std::chrono::milliseconds(200)); }

void Subprocess::spawn(const std::string& path, const std::vector<std::string>& args) {
  if (::access(path.c_str(), X_OK) != 0)
    throw OracleError(OracleError::Kind::Spawn, "engine_session",
                      "cannot execute '" + path + "': " + std::strerror(errno));
  // Writes to a dead engine must surface as EPIPE, not kill us.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) != 0)
    throw OracleError(OracleError::Kind::Spawn, "engine_session", "pipe() failed");

  std::vector<std::string> argv_storage;
  argv_storage.push_back(path);
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError(OracleError::Kind::Spawn, "engine_session", "fork() failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execv(path.c_str(), argv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  int exec_errno = 0;
  const auto n = ::read(err_pipe[0], &exec_errno, sizeof exec_errno);
  ::close(err_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof exec_errno)) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::waitpid(pid, nullptr, 0);
    throw OracleError(OracleError::Kind::Spawn, "engine_session",
                      "exec '" + path + "' failed: " + std::strerror(exec_errno));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
  eof_ = false;
}

bool Subprocess::write_line(const std::string& line) {
  if (to_child_ < 0) return false;
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_ || from_child_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      eof_ = true;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Subprocess::terminate(std::chrono::milliseconds grace) {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ <= 0) return;
  const auto deadline = Clock::now() + grace;
  while (Clock::now() < deadline) {
    if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
      pid_ = -1;
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
  pid_ = -1;
}

UciEngine::UciEngine(EngineOptions options) : options_(std::move(options)) { start(); }

UciEngine::~UciEngine() {
  if (process_.running()) process_.write_line("quit");
  process_.terminate();
}

void UciEngine::wait_for(const std::string& token, std::chrono::milliseconds timeout,
                         const char* operation) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    auto line = process_.read_line(std::max(left, std::chrono::milliseconds(0)));
    if (!line) {
      if (process_.eof())
        throw OracleError(OracleError::Kind::Desync, operation,
                          "engine closed its output while waiting for '" + token + "'");
      throw OracleError(OracleError::Kind::Timeout, operation,
                        "timed out after " + std::to_string(timeout.count()) + " ms waiting for '" +
                            token + "'");
    }
    if (line->rfind("id name ", 0) == 0) identity_ = line->substr(8);
    if (*line == token) return;
  }
}

void UciEngine::start() {
  process_.spawn(options_.path, options_.args);
  identity_ = options_.path;
  if (!process_.write_line("uci"))
    throw OracleError(OracleError::Kind::Spawn, "engine_session", "engine rejected input");
  wait_for("uciok", options_.handshake_timeout, "engine_session");
  process_.write_line("isready");
  wait_for("readyok", options_.handshake_timeout, "engine_session");
}

bool UciEngine::ping() {
  if (!process_.write_line("isready")) return false;
  try {
    wait_for("readyok", options_.handshake_timeout, "ping");
  } catch (const OracleError&) {
    return false;
  }
  return true;
}

void UciEngine::new_game() {
  process_.write_line("ucinewgame");
  process_.write_line("isready");
  wait_for("readyok", options_.handshake_timeout, "new_game");
}

SearchResult UciEngine::search_once(const chess::BoardState& state, const OracleLimits& limits) {
  const std::chrono::milliseconds budget =
      limits.mode == OracleLimits::Mode::Depth
          ? options_.depth_search_timeout
          : std::chrono::milliseconds(limits.movetime_ms * options_.movetime_safety_factor + 1000);
  if (!process_.write_line("position fen " + chess::to_fen(state)) ||
      !process_.write_line(limits.go_command()))
    throw OracleError(OracleError::Kind::Desync, "search", "engine input closed");
  SearchTranscript transcript;
  const auto deadline = Clock::now() + budget;
  while (!transcript.done()) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    auto line = process_.read_line(std::max(left, std::chrono::milliseconds(0)));
    if (!line) {
      throw OracleError(OracleError::Kind::Desync, "search",
                        process_.eof() ? "engine exited during search"
                                       : "no bestmove within " + std::to_string(budget.count()) + " ms");
    }
    transcript.feed(*line);
  }
  return transcript.result(state);
}

SearchResult UciEngine::search(const chess::BoardState& state, const OracleLimits& limits) {
  limits.validate();
  try {
    return search_once(state, limits);
  } catch (const OracleError& e) {
    if (e.kind() != OracleError::Kind::Desync && e.kind() != OracleError::Kind::Timeout) throw;
    spdlog::warn("oracle_client: {}; restarting engine session", e.what());
  }
  ++restarts_;
  process_.terminate(std::chrono::milliseconds(100));
  start();
  return search_once(state, limits);
}

OracleFactory uci_engine_factory(EngineOptions options) {
  return [options] { return std::make_unique<UciEngine>(options); };
}

}  // namespace ogss::oracle
