#include "ogss/models/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace ogss::models {

namespace {

using Kind = CheckpointError::Kind;

std::string shape_text(const std::vector<int>& shape) {
  std::string s;
  for (int d : shape) s += (s.empty() ? "" : ",") + std::to_string(d);
  return s;
}

template <typename Model>
void save(const Model& model, const std::string& descriptor, const std::filesystem::path& path) {
  const auto params = model.params();
  std::size_t count = 0;
  for (const auto* p : params) count += p->size();
  std::ostringstream header;
  header << "ogss-checkpoint " << kCheckpointVersion << "\n"
         << "arch " << descriptor << "\n"
         << "tensors " << params.size() << "\n";
  for (const auto* p : params) header << p->name << " " << shape_text(p->shape) << "\n";
  header << "payload " << count * 4 << "\n";

  std::string payload(count * 4, '\0');
  std::size_t off = 0;
  for (const auto* p : params)
    for (float v : p->value) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      for (int k = 0; k < 4; ++k) payload[off++] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::Io, "save_checkpoint", "cannot open '" + path.string() + "' for writing");
  out << header.str();
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw CheckpointError(Kind::Io, "save_checkpoint", "write failed for '" + path.string() + "'");
}

struct Header {
  std::string descriptor;
  std::vector<std::pair<std::string, std::string>> tensors;
  std::size_t payload = 0;
};

std::string expect_line(std::istream& in, const std::string& key, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line))
    throw CheckpointError(Kind::Truncated, "load_checkpoint", "'" + path.string() + "' ends inside the header");
  if (line.rfind(key + " ", 0) != 0)
    throw CheckpointError(Kind::Format, "load_checkpoint", "expected '" + key + "' line, got '" + line + "'");
  return line.substr(key.size() + 1);
}

std::size_t to_size(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size()) return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
  }
  throw CheckpointError(Kind::Format, "load_checkpoint", std::string("bad ") + what + " '" + text + "'");
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::string magic;
  if (!std::getline(in, magic) || magic.rfind("ogss-checkpoint ", 0) != 0)
    throw CheckpointError(Kind::Format, "load_checkpoint", "'" + path.string() + "' is not a checkpoint");
  const std::string version = magic.substr(16);
  if (version != std::to_string(kCheckpointVersion))
    throw CheckpointError(Kind::Version, "load_checkpoint",
                          "format version " + version + ", expected " + std::to_string(kCheckpointVersion));
  Header h;
  h.descriptor = expect_line(in, "arch", path);
  const std::size_t n = to_size(expect_line(in, "tensors", path), "tensor count");
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw CheckpointError(Kind::Truncated, "load_checkpoint", "'" + path.string() + "' ends inside the header");
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw CheckpointError(Kind::Format, "load_checkpoint", "bad tensor line '" + line + "'");
    h.tensors.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  h.payload = to_size(expect_line(in, "payload", path), "payload size");
  return h;
}

template <typename Model>
Model load_into(Model model, std::istream& in, const Header& h) {
  auto params = model.params();
  if (h.tensors.size() != params.size())
    throw CheckpointError(Kind::Shape, "load_checkpoint",
                          "checkpoint lists " + std::to_string(h.tensors.size()) + " tensors, architecture has " +
                              std::to_string(params.size()));
  std::size_t count = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, shape] = h.tensors[i];
    if (name != params[i]->name || shape != shape_text(params[i]->shape))
      throw CheckpointError(Kind::Shape, "load_checkpoint",
                            "tensor " + std::to_string(i) + " is '" + name + " " + shape + "', expected '" +
                                params[i]->name + " " + shape_text(params[i]->shape) + "'");
    count += params[i]->size();
  }
  if (h.payload != count * 4)
    throw CheckpointError(Kind::Shape, "load_checkpoint",
                          "payload of " + std::to_string(h.payload) + " bytes, architecture needs " +
                              std::to_string(count * 4));
  std::string payload(h.payload, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    throw CheckpointError(Kind::Truncated, "load_checkpoint",
                          "payload has " + std::to_string(in.gcount()) + " of " + std::to_string(h.payload) +
                              " bytes");
  std::size_t off = 0;
  for (auto* p : params)
    for (auto& v : p->value) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[off++])) << (8 * k);
      std::memcpy(&v, &bits, 4);
    }
  return model;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::Io, "load_checkpoint", "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

void save_checkpoint(const PolicyModel& model, const std::filesystem::path& path) {
  save(model, model.arch().descriptor(), path);
}

void save_checkpoint(const BlunderModel& model, const std::filesystem::path& path) {
  save(model, model.arch().descriptor(), path);
}

PolicyModel load_policy_checkpoint(const std::filesystem::path& path) {
  auto in = open(path);
  const Header h = read_header(in, path);
  return load_into(PolicyModel(PolicyArch::parse(h.descriptor)), in, h);
}

BlunderModel load_blunder_checkpoint(const std::filesystem::path& path) {
  auto in = open(path);
  const Header h = read_header(in, path);
  return load_into(BlunderModel(BlunderArch::parse(h.descriptor)), in, h);
}

}  // namespace ogss::models
