#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ogss/models/kernels.hpp"
#include "ogss/util/rng.hpp"

namespace ogss::models {

template <typename T>
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    std::size_t count = 1;
    for (int d : shape) count *= static_cast<std::size_t>(d);
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }
  std::size_t size() const { return value.size(); }
};

// Per-sample layer over a batch. Layers are immutable during forward, so one
// model can serve concurrent callers that bring their own buffers.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual std::string describe() const = 0;
  virtual int in_size() const = 0;
  virtual int out_size() const = 0;
  virtual void forward(const T* in, T* out, int batch) const = 0;
  // Overwrites parameter gradients with d(loss)/d(param) summed over the
  // batch; writes din when non-null.
  virtual void backward(const T* in, const T* out, const T* dout, T* din, int batch) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  std::vector<const Param<T>*> params() const {
    auto ps = const_cast<Layer*>(this)->params();
    return {ps.begin(), ps.end()};
  }
};

// Uniform in +-sqrt(6 / fan_in).
template <typename T>
void he_uniform(std::vector<T>& values, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (auto& v : values) v = static_cast<T>((2.0 * rng.uniform01() - 1.0) * limit);
}

template <typename T>
class Conv3x3 final : public Layer<T> {
 public:
  Conv3x3(std::string name, int cin, int cout)
      : cin_(cin), cout_(cout), w_(name + ".weight", {cout, cin, 3, 3}), b_(name + ".bias", {cout}) {}

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv3x3>(*this); }
  std::string describe() const override {
    return "conv3x3(" + std::to_string(cin_) + "->" + std::to_string(cout_) + ")";
  }
  int in_size() const override { return cin_ * kernels::kCells; }
  int out_size() const override { return cout_ * kernels::kCells; }
  void init(Rng& rng) { he_uniform(w_.value, cin_ * 9, rng); }

  void forward(const T* in, T* out, int batch) const override {
    kernels::conv3x3_forward(backend(), in, batch, cin_, w_.value.data(), b_.value.data(), cout_, out);
  }
  void backward(const T* in, const T*, const T* dout, T* din, int batch) override {
    kernels::conv3x3_backward(backend(), in, batch, cin_, w_.value.data(), cout_, dout, w_.grad.data(),
                              b_.grad.data(), din);
  }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

 private:
  int cin_;
  int cout_;
  Param<T> w_;
  Param<T> b_;
};

// y = gamma[c] * x + beta[c] per channel; the normalization-free stand-in
// for batch norm in the trunk.
template <typename T>
class ChannelAffine final : public Layer<T> {
 public:
  ChannelAffine(std::string name, int channels)
      : channels_(channels), gamma_(name + ".gamma", {channels}), beta_(name + ".beta", {channels}) {
    std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ChannelAffine>(*this); }
  std::string describe() const override { return "affine(" + std::to_string(channels_) + ")"; }
  int in_size() const override { return channels_ * kernels::kCells; }
  int out_size() const override { return in_size(); }

  void forward(const T* in, T* out, int batch) const override {
#pragma omp parallel for schedule(static) if (backend() == Backend::OpenMP)
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < channels_; ++c) {
        const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * kernels::kCells;
        const T g = gamma_.value[c];
        const T s = beta_.value[c];
        for (int p = 0; p < kernels::kCells; ++p) out[base + p] = g * in[base + p] + s;
      }
  }

  void backward(const T* in, const T*, const T* dout, T* din, int batch) override {
    for (int c = 0; c < channels_; ++c) {
      T dg = 0;
      T ds = 0;
      for (int b = 0; b < batch; ++b) {
        const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * kernels::kCells;
        for (int p = 0; p < kernels::kCells; ++p) {
          dg += dout[base + p] * in[base + p];
          ds += dout[base + p];
        }
      }
      gamma_.grad[c] = dg;
      beta_.grad[c] = ds;
    }
    if (!din) return;
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < channels_; ++c) {
        const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(b) * channels_ + c) * kernels::kCells;
        for (int p = 0; p < kernels::kCells; ++p) din[base + p] = gamma_.value[c] * dout[base + p];
      }
  }
  std::vector<Param<T>*> params() override { return {&gamma_, &beta_}; }

 private:
  int channels_;
  Param<T> gamma_;
  Param<T> beta_;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  explicit ReLU(int size) : size_(size) {}

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ReLU>(*this); }
  std::string describe() const override { return "relu"; }
  int in_size() const override { return size_; }
  int out_size() const override { return size_; }

  void forward(const T* in, T* out, int batch) const override {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(batch) * size_;
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
  }
  void backward(const T* in, const T*, const T* dout, T* din, int batch) override {
    if (!din) return;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(batch) * size_;
    for (std::ptrdiff_t i = 0; i < n; ++i) din[i] = in[i] > T(0) ? dout[i] : T(0);
  }

 private:
  int size_;
};

template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::string name, int nin, int nout)
      : nin_(nin), nout_(nout), w_(name + ".weight", {nout, nin}), b_(name + ".bias", {nout}) {}

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }
  std::string describe() const override {
    return "dense(" + std::to_string(nin_) + "->" + std::to_string(nout_) + ")";
  }
  int in_size() const override { return nin_; }
  int out_size() const override { return nout_; }
  void init(Rng& rng) { he_uniform(w_.value, nin_, rng); }

  void forward(const T* in, T* out, int batch) const override {
    kernels::dense_forward(backend(), in, batch, nin_, w_.value.data(), b_.value.data(), nout_, out);
  }
  void backward(const T* in, const T*, const T* dout, T* din, int batch) override {
    kernels::dense_backward(backend(), in, batch, nin_, w_.value.data(), nout_, dout, w_.grad.data(),
                            b_.grad.data(), din);
  }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

 private:
  int nin_;
  int nout_;
  Param<T> w_;
  Param<T> b_;
};

// Layer stack with caller-owned activation buffers.
template <typename T>
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other) {
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
  }
  Sequential& operator=(const Sequential& other) {
    if (this != &other) {
      layers_.clear();
      for (const auto& l : other.layers_) layers_.push_back(l->clone());
    }
    return *this;
  }
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L>
  L& add(L layer) {
    auto p = std::make_unique<L>(std::move(layer));
    L& ref = *p;
    layers_.push_back(std::move(p));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }
  int in_size() const { return layers_.front()->in_size(); }
  int out_size() const { return layers_.back()->out_size(); }

  // acts[0] must hold the input; acts[i + 1] receives layer i's output.
  void forward(std::vector<std::vector<T>>& acts, int batch) const {
    acts.resize(layers_.size() + 1);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      acts[i + 1].resize(static_cast<std::size_t>(batch) * layers_[i]->out_size());
      layers_[i]->forward(acts[i].data(), acts[i + 1].data(), batch);
    }
  }

  // dout is d(loss)/d(output); din (optional) receives d(loss)/d(input).
  void backward(const std::vector<std::vector<T>>& acts, std::vector<T> dout, std::vector<T>* din, int batch) {
    std::vector<T> next;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const bool need = i > 0 || din != nullptr;
      if (need) next.resize(static_cast<std::size_t>(batch) * layers_[i]->in_size());
      layers_[i]->backward(acts[i].data(), acts[i + 1].data(), dout.data(), need ? next.data() : nullptr, batch);
      if (need) dout.swap(next);
    }
    if (din) *din = std::move(dout);
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }
  std::vector<const Param<T>*> params() const {
    auto ps = const_cast<Sequential*>(this)->params();
    return {ps.begin(), ps.end()};
  }

  std::string describe() const {
    std::string s;
    for (const auto& l : layers_) s += (s.empty() ? "" : ",") + l->describe();
    return s;
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Losses over a batch of logits. Each returns the summed per-sample losses in
// `per_sample` and writes d(mean loss)/d(logits) into `dlogits`.

// Numerically stable softmax of one row, computed in double.
template <typename T>
void softmax_row(const T* logits, int k, double* probs) {
  double m = logits[0];
  for (int j = 1; j < k; ++j) m = std::max<double>(m, logits[j]);
  double z = 0;
  for (int j = 0; j < k; ++j) {
    probs[j] = std::exp(static_cast<double>(logits[j]) - m);
    z += probs[j];
  }
  for (int j = 0; j < k; ++j) probs[j] /= z;
}

template <typename T>
double log_sum_exp(const T* logits, int k) {
  double m = logits[0];
  for (int j = 1; j < k; ++j) m = std::max<double>(m, logits[j]);
  double z = 0;
  for (int j = 0; j < k; ++j) z += std::exp(static_cast<double>(logits[j]) - m);
  return m + std::log(z);
}

// Sparse categorical cross-entropy. scale multiplies the gradient (1/batch
// for a mean).
template <typename T>
void softmax_cross_entropy(const T* logits, int batch, int k, const int* labels, double scale,
                           double* per_sample, T* dlogits) {
  std::vector<double> p(k);
  for (int b = 0; b < batch; ++b) {
    const T* row = logits + static_cast<std::ptrdiff_t>(b) * k;
    per_sample[b] += log_sum_exp(row, k) - static_cast<double>(row[labels[b]]);
    softmax_row(row, k, p.data());
    for (int j = 0; j < k; ++j)
      dlogits[static_cast<std::ptrdiff_t>(b) * k + j] =
          static_cast<T>(scale * (p[j] - (j == labels[b] ? 1.0 : 0.0)));
  }
}

// Squared error between the softmax distribution and the one-hot label.
template <typename T>
void softmax_squared_error(const T* logits, int batch, int k, const int* labels, double scale,
                           double* per_sample, T* dlogits) {
  std::vector<double> p(k);
  std::vector<double> e(k);
  for (int b = 0; b < batch; ++b) {
    softmax_row(logits + static_cast<std::ptrdiff_t>(b) * k, k, p.data());
    double loss = 0;
    double dot = 0;
    for (int j = 0; j < k; ++j) {
      e[j] = p[j] - (j == labels[b] ? 1.0 : 0.0);
      loss += e[j] * e[j];
      dot += 2.0 * e[j] * p[j];
    }
    per_sample[b] += loss;
    for (int j = 0; j < k; ++j)
      dlogits[static_cast<std::ptrdiff_t>(b) * k + j] = static_cast<T>(scale * p[j] * (2.0 * e[j] - dot));
  }
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy on one logit per sample.
template <typename T>
void sigmoid_binary_cross_entropy(const T* logits, int batch, const int* labels, double scale,
                                  double* per_sample, T* dlogits) {
  for (int b = 0; b < batch; ++b) {
    const double z = logits[b];
    const double y = labels[b];
    per_sample[b] += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    dlogits[b] = static_cast<T>(scale * (sigmoid(z) - y));
  }
}

}  // namespace ogss::models
