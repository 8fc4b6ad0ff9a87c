#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ogss/loop/game.hpp"

namespace ogss::loop {

// Game archive: one JSON object per line. Positions are not stored; readers
// replay the UCI moves from "start". Agent plies carry the selection summary
// (considered count, fallback flag, legal count, and the chosen move's
// confidence/risk/utility) and the oracle label.
std::string archive_line(const GameRecord& record);
GameRecord parse_archive_line(const std::string& line);

void write_archive(std::ostream& out, std::span<const GameRecord> records);
std::vector<GameRecord> read_archive(std::istream& in);
void save_archive(const std::filesystem::path& path, std::span<const GameRecord> records);
std::vector<GameRecord> load_archive(const std::filesystem::path& path);

// Human-readable export; Result is taken from the adjudicated eval sign when
// the game hit max_plies.
void write_pgn_export(std::ostream& out, std::span<const GameRecord> records);

}  // namespace ogss::loop
