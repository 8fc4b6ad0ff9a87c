// Scripted UCI engine for protocol tests. Answers searches with the mock
// oracle's verdict and can be told to misbehave.
//
//   --noise            surround the final score with distracting info lines
//   --mate N           report "score mate N" instead of the centipawn score
//   --bounds           emit lowerbound/upperbound lines before the exact one
//   --no-uciok         never finish the handshake
//   --crash-once FILE  exit on the first "go" unless FILE exists (creates it)
//   --hang-once FILE   never answer the first "go" unless FILE exists
//   --hang             never answer any "go"
//   --illegal          answer with an illegal best move
//   --no-score         answer without any score line

#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "ogss/chess/board.hpp"
#include "ogss/oracle/mock_oracle.hpp"

namespace {

bool first_time(const std::string& marker) {
  if (marker.empty()) return false;
  if (std::ifstream(marker).good()) return false;
  std::ofstream(marker) << "seen\n";
  return true;
}

void hang() {
  for (;;) std::this_thread::sleep_for(std::chrono::seconds(1));
}

}  // namespace

int main(int argc, char** argv) {
  bool noise = false;
  bool bounds = false;
  bool no_uciok = false;
  bool hang_always = false;
  bool illegal = false;
  bool no_score = false;
  std::string crash_marker;
  std::string hang_marker;
  std::optional<int> mate;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--noise") noise = true;
    else if (a == "--bounds") bounds = true;
    else if (a == "--no-uciok") no_uciok = true;
    else if (a == "--hang") hang_always = true;
    else if (a == "--illegal") illegal = true;
    else if (a == "--no-score") no_score = true;
    else if (a == "--mate" && i + 1 < argc) mate = std::stoi(argv[++i]);
    else if (a == "--crash-once" && i + 1 < argc) crash_marker = argv[++i];
    else if (a == "--hang-once" && i + 1 < argc) hang_marker = argv[++i];
  }

  ogss::oracle::MockOracle oracle;
  ogss::chess::BoardState position = ogss::chess::BoardState::startpos();
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line == "uci") {
      std::cout << "id name FakeEngine 1.0\nid author tests\n";
      if (!no_uciok) std::cout << "uciok\n";
      std::cout.flush();
    } else if (line == "isready") {
      std::cout << "readyok" << std::endl;
    } else if (line == "ucinewgame") {
    } else if (line.rfind("position fen ", 0) == 0) {
      position = ogss::chess::parse_fen(line.substr(13));
    } else if (line.rfind("go", 0) == 0) {
      if (first_time(crash_marker)) return 3;
      if (hang_always || first_time(hang_marker)) hang();
      const auto result = oracle.search(position, ogss::oracle::OracleLimits{});
      const int cp = result.score.value;
      if (noise) {
        std::cout << "info string score cp 7777 is only a comment\n"
                  << "info depth 1 seldepth 1 score cp " << cp - 321 << " nodes 20 pv e2e4\n"
                  << "info depth 2 currmove e2e4 currmovenumber 1\n"
                  << "info nodes 500 nps 1000 hashfull 3\n";
      }
      if (bounds) std::cout << "info depth 3 score cp " << cp + 50 << " lowerbound nodes 9\n";
      if (!no_score) {
        if (mate) {
          std::cout << "info depth 4 score mate " << *mate << " nodes 99 pv a1a2\n";
        } else {
          std::cout << "info depth 4 seldepth 6 multipv 1 score cp " << cp
                    << " nodes 1234 nps 5000 time 3 pv " << result.best_move->uci() << "\n";
        }
      }
      if (noise) std::cout << "info string bestmove a1a1 mentioned in a comment\n";
      std::cout << "bestmove " << (illegal ? std::string("a1a8") : result.best_move->uci())
                << std::endl;
    } else if (line == "quit") {
      return 0;
    }
  }
  return 0;
}
