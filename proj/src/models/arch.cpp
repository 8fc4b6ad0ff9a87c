#include <sstream>

#include "ogss/models/checkpoint.hpp"
#include "ogss/models/network.hpp"

namespace ogss::models {

namespace {

constexpr const char* kNorm = "norm=affine";

[[noreturn]] void bad(const std::string& descriptor, const std::string& why) {
  throw CheckpointError(CheckpointError::Kind::Arch, "load_checkpoint",
                        "architecture descriptor '" + descriptor + "': " + why);
}

int positive_int(const std::string& descriptor, const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size() || v < 1) bad(descriptor, "bad size '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    bad(descriptor, "bad size '" + text + "'");
  }
}

// Splits "kind/v1 a=1 b=2 norm=affine" into tokens after checking the kind.
std::vector<std::string> fields(const std::string& descriptor, const std::string& kind) {
  std::istringstream in(descriptor);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  if (out.empty() || out.front() != kind + "/v1") bad(descriptor, "expected a " + kind + "/v1 model");
  if (out.back() != kNorm) bad(descriptor, "unsupported normalization (expected " + std::string(kNorm) + ")");
  return {out.begin() + 1, out.end() - 1};
}

std::pair<std::string, std::string> key_value(const std::string& descriptor, const std::string& field) {
  const auto eq = field.find('=');
  if (eq == std::string::npos) bad(descriptor, "malformed field '" + field + "'");
  return {field.substr(0, eq), field.substr(eq + 1)};
}

}  // namespace

std::string PolicyArch::descriptor() const {
  std::ostringstream out;
  out << "policy/v1 conv1=" << conv1 << " conv2=" << conv2 << " dense=" << dense << " " << kNorm;
  return out.str();
}

PolicyArch PolicyArch::parse(const std::string& descriptor) {
  const auto fs = fields(descriptor, "policy");
  if (fs.size() != 3) bad(descriptor, "expected conv1, conv2 and dense");
  PolicyArch a;
  const char* keys[] = {"conv1", "conv2", "dense"};
  int* slots[] = {&a.conv1, &a.conv2, &a.dense};
  for (int i = 0; i < 3; ++i) {
    const auto [k, v] = key_value(descriptor, fs[i]);
    if (k != keys[i]) bad(descriptor, "expected '" + std::string(keys[i]) + "', got '" + k + "'");
    *slots[i] = positive_int(descriptor, v);
  }
  return a;
}

std::string BlunderArch::descriptor() const {
  std::ostringstream out;
  out << "blunder/v1 conv1=" << conv1 << " conv2=" << conv2 << " hidden=" << hidden[0] << "," << hidden[1]
      << "," << hidden[2] << (move_planes ? " move=planes " : " ") << kNorm;
  return out.str();
}

BlunderArch BlunderArch::parse(const std::string& descriptor) {
  const auto fs = fields(descriptor, "blunder");
  if (fs.size() != 3 && fs.size() != 4) bad(descriptor, "expected conv1, conv2, hidden and optional move");
  BlunderArch a;
  if (fs.size() == 4) {
    if (fs[3] != "move=planes") bad(descriptor, "unknown field '" + fs[3] + "'");
    a.move_planes = true;
  }
  auto [k1, v1] = key_value(descriptor, fs[0]);
  auto [k2, v2] = key_value(descriptor, fs[1]);
  auto [k3, v3] = key_value(descriptor, fs[2]);
  if (k1 != "conv1" || k2 != "conv2" || k3 != "hidden") bad(descriptor, "unexpected field order");
  a.conv1 = positive_int(descriptor, v1);
  a.conv2 = positive_int(descriptor, v2);
  std::istringstream hs(v3);
  std::string part;
  int i = 0;
  while (std::getline(hs, part, ',')) {
    if (i >= 3) bad(descriptor, "hidden needs exactly three widths");
    a.hidden[i++] = positive_int(descriptor, part);
  }
  if (i != 3) bad(descriptor, "hidden needs exactly three widths");
  return a;
}

}  // namespace ogss::models
