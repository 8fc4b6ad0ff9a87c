#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ogss/chess/board.hpp"
#include "ogss/data/pgn.hpp"
#include "ogss/util/error.hpp"

namespace ogss::data {

struct Provenance {
  std::string source;
  std::size_t game_index = 0;

  bool operator==(const Provenance&) const = default;
};

struct PolicyExample {
  chess::BoardState state;
  chess::MoveCode move;
  Provenance provenance;

  bool operator==(const PolicyExample&) const = default;
};

struct PolicyDataset {
  std::vector<PolicyExample> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

class EmptyDatasetError : public Error {
 public:
  explicit EmptyDatasetError(const std::string& message)
      : Error("data_ingest", "build_policy_dataset", message) {}
};

class DatasetFormatError : public Error {
 public:
  DatasetFormatError(std::size_t line, const std::string& message)
      : Error("data_ingest", "read_dataset", "line " + std::to_string(line) + ": " + message) {}
};

// Keeps games that end in checkmate, up to `limit` of them, and emits one
// (state, move) pair per ply; with winner_only only the winner's plies.
PolicyDataset build_policy_dataset(std::span<const GameRecordRaw> games, std::size_t limit,
                                   bool winner_only = true);

// Streaming variant over a PGN reader; per-game parse errors are skipped and
// counted in *skipped when non-null.
PolicyDataset build_policy_dataset(PgnReader& reader, std::size_t limit, bool winner_only = true,
                                   std::size_t* skipped = nullptr);

// Deterministic shuffle under seed, then the first round(fraction * N) pairs
// become the training split.
std::pair<PolicyDataset, PolicyDataset> split_dataset(const PolicyDataset& ds, double fraction,
                                                      std::uint64_t seed);

// Text format: header line "ogss-policy-dataset 1", then one
// "<fen>\t<uci>\t<source>\t<game index>" line per pair.
inline constexpr std::string_view kPolicyDatasetHeader = "ogss-policy-dataset 1";

void write_dataset(std::ostream& out, const PolicyDataset& ds);
PolicyDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const PolicyDataset& ds);
PolicyDataset load_dataset(const std::filesystem::path& path);

}  // namespace ogss::data
