#pragma once

#include <array>
#include <string>
#include <vector>

#include "ogss/models/layers.hpp"

namespace ogss::models {

inline constexpr int kBoardInputs = 12 * 64;
inline constexpr int kExtraInputs = 5 + 3;  // metadata + move vector
inline constexpr int kPromoClasses = 5;
inline constexpr int kMovePlanes = 2;  // from-square, to-square

struct PolicyArch {
  int conv1 = 32;
  int conv2 = 64;
  int dense = 256;

  // "policy/v1 conv1=32 conv2=64 dense=256 norm=affine"
  std::string descriptor() const;
  // Throws CheckpointError(Arch) on anything that is not a policy descriptor.
  static PolicyArch parse(const std::string& descriptor);
  bool operator==(const PolicyArch&) const = default;
};

struct BlunderArch {
  int conv1 = 32;
  int conv2 = 64;
  std::array<int, 3> hidden{128, 64, 32};
  // Also feed the proposed move to the trunk as two one-hot planes
  // (from-square, to-square) after the 12 piece planes. The move vector
  // still enters the head either way.
  bool move_planes = false;

  int input_channels() const { return 12 + (move_planes ? kMovePlanes : 0); }

  // "blunder/v1 conv1=32 conv2=64 hidden=128,64,32 norm=affine", with
  // " move=planes" before the norm field when move_planes is set.
  std::string descriptor() const;
  static BlunderArch parse(const std::string& descriptor);
  bool operator==(const BlunderArch&) const = default;
};

// conv3x3 -> affine -> relu, twice; output is the flattened 64-square map.
template <typename T>
Sequential<T> make_trunk(int in_channels, int conv1, int conv2) {
  Sequential<T> s;
  s.add(Conv3x3<T>("trunk.conv1", in_channels, conv1));
  s.add(ChannelAffine<T>("trunk.affine1", conv1));
  s.add(ReLU<T>(conv1 * 64));
  s.add(Conv3x3<T>("trunk.conv2", conv1, conv2));
  s.add(ChannelAffine<T>("trunk.affine2", conv2));
  s.add(ReLU<T>(conv2 * 64));
  return s;
}

template <typename T>
void init_trunk(Sequential<T>& trunk, Rng& rng) {
  static_cast<Conv3x3<T>&>(trunk.layer(0)).init(rng);
  static_cast<Conv3x3<T>&>(trunk.layer(3)).init(rng);
}

template <typename T>
struct PolicyWorkspace {
  std::vector<std::vector<T>> trunk;
  std::vector<std::vector<T>> body;
  std::vector<T> from, to, promo;
};

// Trunk, a dense+relu body, and three independent logit heads.
template <typename T>
class PolicyNet {
 public:
  explicit PolicyNet(const PolicyArch& arch = {})
      : arch_(arch),
        trunk_(make_trunk<T>(12, arch.conv1, arch.conv2)),
        from_("head.from", arch.dense, 64),
        to_("head.to", arch.dense, 64),
        promo_("head.promo", arch.dense, kPromoClasses) {
    body_.add(Dense<T>("body.dense", arch.conv2 * 64, arch.dense));
    body_.add(ReLU<T>(arch.dense));
  }

  // He-uniform hidden layers; heads stay zero so the untrained model is uniform.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    init_trunk(trunk_, rng);
    static_cast<Dense<T>&>(body_.layer(0)).init(rng);
  }

  const PolicyArch& arch() const { return arch_; }

  // ws.trunk[0] must hold `batch` board tensors.
  void forward(PolicyWorkspace<T>& ws, int batch) const {
    trunk_.forward(ws.trunk, batch);
    ws.body.resize(1);
    ws.body[0] = ws.trunk.back();
    body_.forward(ws.body, batch);
    const T* h = ws.body.back().data();
    ws.from.resize(static_cast<std::size_t>(batch) * 64);
    ws.to.resize(static_cast<std::size_t>(batch) * 64);
    ws.promo.resize(static_cast<std::size_t>(batch) * kPromoClasses);
    from_.forward(h, ws.from.data(), batch);
    to_.forward(h, ws.to.data(), batch);
    promo_.forward(h, ws.promo.data(), batch);
  }

  void backward(const PolicyWorkspace<T>& ws, const std::vector<T>& dfrom, const std::vector<T>& dto,
                const std::vector<T>& dpromo, int batch) {
    const T* h = ws.body.back().data();
    const std::size_t n = static_cast<std::size_t>(batch) * arch_.dense;
    std::vector<T> dh(n), tmp(n);
    from_.backward(h, nullptr, dfrom.data(), dh.data(), batch);
    to_.backward(h, nullptr, dto.data(), tmp.data(), batch);
    for (std::size_t i = 0; i < n; ++i) dh[i] += tmp[i];
    promo_.backward(h, nullptr, dpromo.data(), tmp.data(), batch);
    for (std::size_t i = 0; i < n; ++i) dh[i] += tmp[i];
    std::vector<T> dtrunk;
    body_.backward(ws.body, std::move(dh), &dtrunk, batch);
    trunk_.backward(ws.trunk, std::move(dtrunk), nullptr, batch);
  }

  std::vector<Param<T>*> params() {
    auto out = trunk_.params();
    for (auto* p : body_.params()) out.push_back(p);
    for (auto* p : from_.params()) out.push_back(p);
    for (auto* p : to_.params()) out.push_back(p);
    for (auto* p : promo_.params()) out.push_back(p);
    return out;
  }
  std::vector<const Param<T>*> params() const {
    auto ps = const_cast<PolicyNet*>(this)->params();
    return {ps.begin(), ps.end()};
  }

 private:
  PolicyArch arch_;
  Sequential<T> trunk_;
  Sequential<T> body_;
  Dense<T> from_;
  Dense<T> to_;
  Dense<T> promo_;
};

template <typename T>
struct BlunderWorkspace {
  std::vector<std::vector<T>> trunk;
  std::vector<std::vector<T>> head;
};

// Trunk features concatenated with metadata and move vectors, then three
// dense+relu layers and a single logit.
template <typename T>
class BlunderNet {
 public:
  explicit BlunderNet(const BlunderArch& arch = {})
      : arch_(arch), trunk_(make_trunk<T>(arch.input_channels(), arch.conv1, arch.conv2)) {
    int width = features() + kExtraInputs;
    for (int i = 0; i < 3; ++i) {
      head_.add(Dense<T>("head.dense" + std::to_string(i + 1), width, arch.hidden[i]));
      head_.add(ReLU<T>(arch.hidden[i]));
      width = arch.hidden[i];
    }
    head_.add(Dense<T>("head.out", width, 1));
  }

  // Final unit stays zero so the untrained model outputs exactly 0.5.
  void init(std::uint64_t seed) {
    Rng rng(seed);
    init_trunk(trunk_, rng);
    for (std::size_t i = 0; i + 1 < head_.size(); i += 2) static_cast<Dense<T>&>(head_.layer(i)).init(rng);
  }

  const BlunderArch& arch() const { return arch_; }
  int features() const { return arch_.conv2 * 64; }
  int input_size() const { return arch_.input_channels() * 64; }

  // ws.trunk[0] holds `batch` inputs of input_size(); extras holds batch x 8
  // values.
  void forward(BlunderWorkspace<T>& ws, const std::vector<T>& extras, int batch) const {
    trunk_.forward(ws.trunk, batch);
    concat(ws, ws.trunk.back(), extras, batch, false);
    head_.forward(ws.head, batch);
  }

  // One board (ws.trunk[0]) scored against `rows` extra vectors. Only for
  // models without move planes.
  void forward_shared(BlunderWorkspace<T>& ws, const std::vector<T>& extras, int rows) const {
    trunk_.forward(ws.trunk, 1);
    concat(ws, ws.trunk.back(), extras, rows, true);
    head_.forward(ws.head, rows);
  }

  // Logits are ws.head.back(); dlogit has one entry per sample.
  void backward(const BlunderWorkspace<T>& ws, std::vector<T> dlogit, int batch) {
    std::vector<T> dcat;
    head_.backward(ws.head, std::move(dlogit), &dcat, batch);
    const int f = features();
    const int w = f + kExtraInputs;
    std::vector<T> dfeat(static_cast<std::size_t>(batch) * f);
    for (int b = 0; b < batch; ++b)
      std::copy_n(dcat.begin() + static_cast<std::ptrdiff_t>(b) * w, f,
                  dfeat.begin() + static_cast<std::ptrdiff_t>(b) * f);
    trunk_.backward(ws.trunk, std::move(dfeat), nullptr, batch);
  }

  std::vector<Param<T>*> params() {
    auto out = trunk_.params();
    for (auto* p : head_.params()) out.push_back(p);
    return out;
  }
  std::vector<const Param<T>*> params() const {
    auto ps = const_cast<BlunderNet*>(this)->params();
    return {ps.begin(), ps.end()};
  }

 private:
  void concat(BlunderWorkspace<T>& ws, const std::vector<T>& feats, const std::vector<T>& extras, int rows,
              bool shared) const {
    const int f = features();
    const int w = f + kExtraInputs;
    ws.head.resize(1);
    ws.head[0].resize(static_cast<std::size_t>(rows) * w);
    for (int r = 0; r < rows; ++r) {
      T* dst = ws.head[0].data() + static_cast<std::ptrdiff_t>(r) * w;
      const T* src = feats.data() + (shared ? 0 : static_cast<std::ptrdiff_t>(r) * f);
      std::copy_n(src, f, dst);
      std::copy_n(extras.data() + static_cast<std::ptrdiff_t>(r) * kExtraInputs, kExtraInputs, dst + f);
    }
  }

  BlunderArch arch_;
  Sequential<T> trunk_;
  Sequential<T> head_;
};

}  // namespace ogss::models
