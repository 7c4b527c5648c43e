#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "amod/image.hpp"
#include "amod/parallel.hpp"
#include "amod/rng.hpp"
#include "amod/tensor.hpp"

namespace amod {

enum class NetMode { kTrain, kEval };

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Named view of one learnable tensor and its gradient slot.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Tensor<Scalar>* value = nullptr;
  Tensor<Scalar>* grad = nullptr;
};

// Named view of a non-learnable buffer (BatchNorm running stats).
template <typename Scalar>
struct BufferRef {
  std::string name;
  Tensor<Scalar>* value = nullptr;
};

namespace detail {

template <typename Scalar>
void kaiming_uniform(Tensor<Scalar>& t, int fan_in, Pcg32& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < t.size(); ++i)
    t.data[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
}

}  // namespace detail

// 2-d convolution, stride 1, square kernel, zero padding. Batched NCHW;
// forward and backward run through im2col + GEMM, with the column matrix
// rebuilt in backward instead of cached.
template <typename Scalar>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_c, int out_c, int kernel, int pad)
      : name_(std::move(name)), in_c_(in_c), out_c_(out_c), k_(kernel), pad_(pad) {
    weight_ = Tensor<Scalar>({out_c, in_c * kernel * kernel});
    bias_ = Tensor<Scalar>({out_c});
    wgrad_ = Tensor<Scalar>({out_c, in_c * kernel * kernel});
    bgrad_ = Tensor<Scalar>({out_c});
  }

  void init(Pcg32& rng) {
    detail::kaiming_uniform(weight_, in_c_ * k_ * k_, rng);
    bias_.set_zero();
  }

  int out_size(int in_size) const { return in_size + 2 * pad_ - k_ + 1; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    x_ = x;
    const int batch = x.extent(0), h = x.extent(2), w = x.extent(3);
    if (x.extent(1) != in_c_)
      throw DataError(name_ + ": expected " + std::to_string(in_c_) + " channels");
    const int oh = out_size(h), ow = out_size(w);
    if (oh <= 0 || ow <= 0) throw DataError(name_ + ": input too small");

    MatX<Scalar> cols = im2col(x);
    Eigen::Map<const MatX<Scalar>> wmat(weight_.data.data(), in_c_ * k_ * k_,
                                        out_c_);
    MatX<Scalar> out_mat = wmat.transpose() * cols;  // out_c x (B*S)

    Tensor<Scalar> y({batch, out_c_, oh, ow});
    const Eigen::Index S = static_cast<Eigen::Index>(oh) * ow;
    for (int b = 0; b < batch; ++b)
      for (int oc = 0; oc < out_c_; ++oc)
        for (Eigen::Index s = 0; s < S; ++s)
          y.data[(static_cast<Eigen::Index>(b) * out_c_ + oc) * S + s] =
              out_mat(oc, static_cast<Eigen::Index>(b) * S + s) + bias_.data[oc];
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const int batch = x_.extent(0), h = x_.extent(2), w = x_.extent(3);
    const int oh = out_size(h), ow = out_size(w);
    const Eigen::Index S = static_cast<Eigen::Index>(oh) * ow;

    MatX<Scalar> dmat(out_c_, static_cast<Eigen::Index>(batch) * S);
    for (int b = 0; b < batch; ++b)
      for (int oc = 0; oc < out_c_; ++oc)
        for (Eigen::Index s = 0; s < S; ++s)
          dmat(oc, static_cast<Eigen::Index>(b) * S + s) =
              dy.data[(static_cast<Eigen::Index>(b) * out_c_ + oc) * S + s];

    MatX<Scalar> cols = im2col(x_);
    Eigen::Map<MatX<Scalar>> wg(wgrad_.data.data(), in_c_ * k_ * k_, out_c_);
    wg += cols * dmat.transpose();
    bgrad_.data.matrix() += dmat.rowwise().sum();

    Eigen::Map<const MatX<Scalar>> wmat(weight_.data.data(), in_c_ * k_ * k_,
                                        out_c_);
    MatX<Scalar> dcols = wmat * dmat;  // (in_c*k*k) x (B*S)

    Tensor<Scalar> dx({batch, in_c_, h, w});
    col2im(dcols, batch, h, w, dx);
    return dx;
  }

  void collect(std::vector<ParamRef<Scalar>>& params) {
    params.push_back({name_ + ".weight", &weight_, &wgrad_});
    params.push_back({name_ + ".bias", &bias_, &bgrad_});
  }

  Tensor<Scalar>& weight() { return weight_; }
  Tensor<Scalar>& bias() { return bias_; }

 private:
  // Columns laid out (in_c*k*k) x (B*S) with each sample's block contiguous.
  MatX<Scalar> im2col(const Tensor<Scalar>& x) const {
    const int batch = x.extent(0), h = x.extent(2), w = x.extent(3);
    const int oh = out_size(h), ow = out_size(w);
    const Eigen::Index S = static_cast<Eigen::Index>(oh) * ow;
    MatX<Scalar> cols(in_c_ * k_ * k_, static_cast<Eigen::Index>(batch) * S);
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      const Scalar* xb =
          x.data.data() + static_cast<Eigen::Index>(b) * in_c_ * h * w;
      for (int ic = 0; ic < in_c_; ++ic)
        for (int ky = 0; ky < k_; ++ky)
          for (int kx = 0; kx < k_; ++kx) {
            const int row = (ic * k_ + ky) * k_ + kx;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy + ky - pad_;
              Scalar* dst =
                  cols.data() +
                  (static_cast<Eigen::Index>(b) * S +
                   static_cast<Eigen::Index>(oy) * ow) *
                      cols.rows() +
                  row;
              if (iy < 0 || iy >= h) {
                for (int ox = 0; ox < ow; ++ox) dst[static_cast<Eigen::Index>(ox) * cols.rows()] = Scalar(0);
                continue;
              }
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox + kx - pad_;
                dst[static_cast<Eigen::Index>(ox) * cols.rows()] =
                    (ix >= 0 && ix < w)
                        ? xb[(static_cast<Eigen::Index>(ic) * h + iy) * w + ix]
                        : Scalar(0);
              }
            }
          }
    });
    return cols;
  }

  void col2im(const MatX<Scalar>& dcols, int batch, int h, int w,
              Tensor<Scalar>& dx) const {
    const int oh = out_size(h), ow = out_size(w);
    const Eigen::Index S = static_cast<Eigen::Index>(oh) * ow;
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      Scalar* dxb =
          dx.data.data() + static_cast<Eigen::Index>(b) * in_c_ * h * w;
      for (int ic = 0; ic < in_c_; ++ic)
        for (int ky = 0; ky < k_; ++ky)
          for (int kx = 0; kx < k_; ++kx) {
            const int row = (ic * k_ + ky) * k_ + kx;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy + ky - pad_;
              if (iy < 0 || iy >= h) continue;
              const Scalar* src =
                  dcols.data() +
                  (static_cast<Eigen::Index>(b) * S +
                   static_cast<Eigen::Index>(oy) * ow) *
                      dcols.rows() +
                  row;
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox + kx - pad_;
                if (ix >= 0 && ix < w)
                  dxb[(static_cast<Eigen::Index>(ic) * h + iy) * w + ix] +=
                      src[static_cast<Eigen::Index>(ox) * dcols.rows()];
              }
            }
          }
    });
  }

  std::string name_;
  int in_c_ = 0, out_c_ = 0, k_ = 0, pad_ = 0;
  Tensor<Scalar> weight_, bias_, wgrad_, bgrad_;
  Tensor<Scalar> x_;
};

// Spatial batch normalization. Train mode normalizes with batch statistics
// (biased variance) and maintains running stats with momentum 0.1; eval mode
// uses the running stats.
template <typename Scalar>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels)
      : name_(std::move(name)), c_(channels) {
    gamma_ = Tensor<Scalar>({channels});
    beta_ = Tensor<Scalar>({channels});
    ggrad_ = Tensor<Scalar>({channels});
    bgrad_ = Tensor<Scalar>({channels});
    running_mean_ = Tensor<Scalar>({channels});
    running_var_ = Tensor<Scalar>({channels});
    gamma_.data.setConstant(Scalar(1));
    running_var_.data.setConstant(Scalar(1));
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, NetMode mode) {
    const int batch = x.extent(0), h = x.extent(2), w = x.extent(3);
    if (x.extent(1) != c_) throw DataError(name_ + ": channel mismatch");
    const Eigen::Index S = static_cast<Eigen::Index>(h) * w;
    const Eigen::Index n = static_cast<Eigen::Index>(batch) * S;

    Tensor<Scalar> y(x.shape);
    if (mode == NetMode::kTrain) {
      xhat_ = Tensor<Scalar>(x.shape);
      invstd_.resize(c_);
      n_ = n;
      for (int c = 0; c < c_; ++c) {
        Scalar mean = 0, var = 0;
        for (int b = 0; b < batch; ++b)
          mean += slice(x, b, c, S).sum();
        mean /= static_cast<Scalar>(n);
        for (int b = 0; b < batch; ++b)
          var += (slice(x, b, c, S) - mean).square().sum();
        var /= static_cast<Scalar>(n);
        const Scalar inv = Scalar(1) / std::sqrt(var + eps_);
        invstd_[static_cast<std::size_t>(c)] = inv;
        for (int b = 0; b < batch; ++b) {
          auto xh = slice(xhat_, b, c, S);
          xh = (slice(x, b, c, S) - mean) * inv;
          slice(y, b, c, S) = gamma_.data[c] * xh + beta_.data[c];
        }
        // Unbiased variance feeds the running estimate.
        const Scalar unbiased =
            n > 1 ? var * static_cast<Scalar>(n) / static_cast<Scalar>(n - 1) : var;
        running_mean_.data[c] =
            (Scalar(1) - momentum_) * running_mean_.data[c] + momentum_ * mean;
        running_var_.data[c] =
            (Scalar(1) - momentum_) * running_var_.data[c] + momentum_ * unbiased;
      }
    } else {
      for (int c = 0; c < c_; ++c) {
        const Scalar inv = Scalar(1) / std::sqrt(running_var_.data[c] + eps_);
        for (int b = 0; b < batch; ++b)
          slice(y, b, c, S) =
              gamma_.data[c] * ((slice(x, b, c, S) - running_mean_.data[c]) * inv) +
              beta_.data[c];
      }
    }
    return y;
  }

  // Train-mode backward including the batch-statistics terms.
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const int batch = dy.extent(0), h = dy.extent(2), w = dy.extent(3);
    const Eigen::Index S = static_cast<Eigen::Index>(h) * w;
    Tensor<Scalar> dx(dy.shape);
    for (int c = 0; c < c_; ++c) {
      Scalar sum_dy = 0, sum_dy_xhat = 0;
      for (int b = 0; b < batch; ++b) {
        sum_dy += slice(dy, b, c, S).sum();
        sum_dy_xhat += (slice(dy, b, c, S) * slice(xhat_, b, c, S)).sum();
      }
      ggrad_.data[c] += sum_dy_xhat;
      bgrad_.data[c] += sum_dy;
      const Scalar scale = gamma_.data[c] * invstd_[static_cast<std::size_t>(c)] /
                           static_cast<Scalar>(n_);
      for (int b = 0; b < batch; ++b)
        slice(dx, b, c, S) =
            scale * (static_cast<Scalar>(n_) * slice(dy, b, c, S) - sum_dy -
                     slice(xhat_, b, c, S) * sum_dy_xhat);
    }
    return dx;
  }

  void collect(std::vector<ParamRef<Scalar>>& params) {
    params.push_back({name_ + ".gamma", &gamma_, &ggrad_});
    params.push_back({name_ + ".beta", &beta_, &bgrad_});
  }
  void collect_buffers(std::vector<BufferRef<Scalar>>& buffers) {
    buffers.push_back({name_ + ".running_mean", &running_mean_});
    buffers.push_back({name_ + ".running_var", &running_var_});
  }

 private:
  static Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> slice(
      Tensor<Scalar>& t, int b, int c, Eigen::Index S) {
    return {t.data.data() +
                (static_cast<Eigen::Index>(b) * t.extent(1) + c) * S,
            S};
  }
  static Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> slice(
      const Tensor<Scalar>& t, int b, int c, Eigen::Index S) {
    return {t.data.data() +
                (static_cast<Eigen::Index>(b) * t.extent(1) + c) * S,
            S};
  }

  std::string name_;
  int c_ = 0;
  Scalar eps_ = Scalar(1e-5);
  Scalar momentum_ = Scalar(0.1);
  Tensor<Scalar> gamma_, beta_, ggrad_, bgrad_;
  Tensor<Scalar> running_mean_, running_var_;
  Tensor<Scalar> xhat_;
  std::vector<Scalar> invstd_;
  Eigen::Index n_ = 0;
};

template <typename Scalar>
class ReLU {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    y_ = Tensor<Scalar>(x.shape);
    y_.data = x.data.cwiseMax(Scalar(0));
    return y_;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(dy.shape);
    dx.data = (y_.data > Scalar(0)).select(dy.data, Scalar(0));
    return dx;
  }

 private:
  Tensor<Scalar> y_;
};

// 2x2 max pooling, stride 2. Ties go to the first index in row-major order.
template <typename Scalar>
class MaxPool2x2 {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    const int batch = x.extent(0), c = x.extent(1), h = x.extent(2),
              w = x.extent(3);
    if (h % 2 != 0 || w % 2 != 0) throw DataError("maxpool: odd spatial size");
    in_shape_ = x.shape;
    const int oh = h / 2, ow = w / 2;
    Tensor<Scalar> y({batch, c, oh, ow});
    argmax_.assign(static_cast<std::size_t>(y.size()), 0);

    Eigen::Index oi = 0;
    for (int b = 0; b < batch; ++b)
      for (int ch = 0; ch < c; ++ch) {
        const Scalar* plane =
            x.data.data() + (static_cast<Eigen::Index>(b) * c + ch) * h * w;
        for (int oy = 0; oy < oh; ++oy)
          for (int ox = 0; ox < ow; ++ox, ++oi) {
            Scalar best = std::numeric_limits<Scalar>::lowest();
            Eigen::Index best_idx = 0;
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const Eigen::Index idx =
                    static_cast<Eigen::Index>(2 * oy + dy) * w + 2 * ox + dx;
                if (plane[idx] > best) {  // strict: first max wins
                  best = plane[idx];
                  best_idx = idx;
                }
              }
            y.data[oi] = best;
            argmax_[static_cast<std::size_t>(oi)] =
                (static_cast<Eigen::Index>(b) * c + ch) * h * w + best_idx;
          }
      }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(in_shape_);
    for (Eigen::Index i = 0; i < dy.size(); ++i)
      dx.data[argmax_[static_cast<std::size_t>(i)]] += dy.data[i];
    return dx;
  }

 private:
  std::vector<int> in_shape_;
  std::vector<Eigen::Index> argmax_;
};

// Global average pooling [B,C,H,W] -> [B,C].
template <typename Scalar>
class GlobalAvgPool {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    in_shape_ = x.shape;
    const int batch = x.extent(0), c = x.extent(1);
    const Eigen::Index S = static_cast<Eigen::Index>(x.extent(2)) * x.extent(3);
    Tensor<Scalar> y({batch, c});
    for (int b = 0; b < batch; ++b)
      for (int ch = 0; ch < c; ++ch) {
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> m(
            x.data.data() + (static_cast<Eigen::Index>(b) * c + ch) * S, S);
        y.data[static_cast<Eigen::Index>(b) * c + ch] =
            m.sum() / static_cast<Scalar>(S);
      }
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(in_shape_);
    const int batch = in_shape_[0], c = in_shape_[1];
    const Eigen::Index S =
        static_cast<Eigen::Index>(in_shape_[2]) * in_shape_[3];
    for (int b = 0; b < batch; ++b)
      for (int ch = 0; ch < c; ++ch) {
        const Scalar g =
            dy.data[static_cast<Eigen::Index>(b) * c + ch] / static_cast<Scalar>(S);
        Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>>(
            dx.data.data() + (static_cast<Eigen::Index>(b) * c + ch) * S, S)
            .setConstant(g);
      }
    return dx;
  }

 private:
  std::vector<int> in_shape_;
};

}  // namespace amod
