#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "amod/common.hpp"

namespace amod {

// Planar image: channel-major storage, each plane row-major, values are
// expected in [0,1] after load. Planes are exposed as Eigen maps so callers
// can use array expressions directly.
template <typename Scalar>
class Image {
 public:
  using Plane =
      Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using PlaneMap = Eigen::Map<Plane>;
  using ConstPlaneMap = Eigen::Map<const Plane>;
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Image() = default;
  Image(int height, int width, int channels)
      : height_(height), width_(width), channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0)
      throw DataError("Image: non-positive dimensions");
    data_ = Storage::Zero(static_cast<Eigen::Index>(height) * width * channels);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  Eigen::Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  Scalar& operator()(int c, int y, int x) {
    return data_[(static_cast<Eigen::Index>(c) * height_ + y) * width_ + x];
  }
  Scalar operator()(int c, int y, int x) const {
    return data_[(static_cast<Eigen::Index>(c) * height_ + y) * width_ + x];
  }

  PlaneMap plane(int c) {
    return PlaneMap(data_.data() + static_cast<Eigen::Index>(c) * height_ * width_,
                    height_, width_);
  }
  ConstPlaneMap plane(int c) const {
    return ConstPlaneMap(
        data_.data() + static_cast<Eigen::Index>(c) * height_ * width_, height_,
        width_);
  }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  template <typename Other>
  Image<Other> cast() const {
    Image<Other> out(height_, width_, channels_);
    out.data() = data_.template cast<Other>();
    return out;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  Storage data_;
};

using Frame = Image<float>;

// ITU-R BT.601 luma; single-channel input passes through.
template <typename Scalar>
Image<Scalar> luma(const Image<Scalar>& img) {
  if (img.channels() == 1) return img;
  if (img.channels() < 3) throw DataError("luma: expected 1 or 3 channels");
  Image<Scalar> out(img.height(), img.width(), 1);
  out.plane(0) = Scalar(0.299) * img.plane(0) + Scalar(0.587) * img.plane(1) +
                 Scalar(0.114) * img.plane(2);
  return out;
}

// Bilinear lookup with border clamp.
template <typename Scalar>
Scalar sample_bilinear(const Image<Scalar>& img, int c, Scalar y, Scalar x) {
  const int h = img.height(), w = img.width();
  Scalar xc = std::min(std::max(x, Scalar(0)), Scalar(w - 1));
  Scalar yc = std::min(std::max(y, Scalar(0)), Scalar(h - 1));
  int x0 = static_cast<int>(std::floor(xc));
  int y0 = static_cast<int>(std::floor(yc));
  int x1 = std::min(x0 + 1, w - 1);
  int y1 = std::min(y0 + 1, h - 1);
  Scalar fx = xc - Scalar(x0);
  Scalar fy = yc - Scalar(y0);
  Scalar v00 = img(c, y0, x0), v01 = img(c, y0, x1);
  Scalar v10 = img(c, y1, x0), v11 = img(c, y1, x1);
  Scalar top = v00 + fx * (v01 - v00);
  Scalar bot = v10 + fx * (v11 - v10);
  return top + fy * (bot - top);
}

template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw DataError("resize: bad target size");
  if (out_h == img.height() && out_w == img.width()) return img;
  Image<Scalar> out(out_h, out_w, img.channels());
  const Scalar sy = Scalar(img.height()) / Scalar(out_h);
  const Scalar sx = Scalar(img.width()) / Scalar(out_w);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < out_h; ++y) {
      const Scalar src_y = (Scalar(y) + Scalar(0.5)) * sy - Scalar(0.5);
      for (int x = 0; x < out_w; ++x) {
        const Scalar src_x = (Scalar(x) + Scalar(0.5)) * sx - Scalar(0.5);
        out(c, y, x) = sample_bilinear(img, c, src_y, src_x);
      }
    }
  return out;
}

// Rotation about the image center, bilinear, zero fill outside the source.
template <typename Scalar>
Image<Scalar> rotate_bilinear(const Image<Scalar>& img, double degrees) {
  if (degrees == 0.0) return img;
  const double rad = degrees * 0.017453292519943295;
  const double ca = std::cos(rad), sa = std::sin(rad);
  const double cy = 0.5 * (img.height() - 1), cx = 0.5 * (img.width() - 1);
  Image<Scalar> out(img.height(), img.width(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const double dy = y - cy, dx = x - cx;
        const double src_y = cy + ca * dy - sa * dx;
        const double src_x = cx + sa * dy + ca * dx;
        if (src_y < -0.5 || src_y > img.height() - 0.5 || src_x < -0.5 ||
            src_x > img.width() - 0.5) {
          out(c, y, x) = Scalar(0);
        } else {
          out(c, y, x) = sample_bilinear(img, c, static_cast<Scalar>(src_y),
                                         static_cast<Scalar>(src_x));
        }
      }
  return out;
}

// Integer pixel shift, zero fill. Positive dx moves content right,
// positive dy moves content down.
template <typename Scalar>
Image<Scalar> shift_pixels(const Image<Scalar>& img, int dx, int dy) {
  if (dx == 0 && dy == 0) return img;
  Image<Scalar> out(img.height(), img.width(), img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y) {
      int sy = y - dy;
      if (sy < 0 || sy >= img.height()) continue;
      for (int x = 0; x < img.width(); ++x) {
        int sx = x - dx;
        if (sx < 0 || sx >= img.width()) continue;
        out(c, y, x) = img(c, sy, sx);
      }
    }
  return out;
}

template <typename Scalar>
void clamp01(Image<Scalar>& img) {
  img.data() = img.data().cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

template <typename Scalar>
Scalar linf_distance(const Image<Scalar>& a, const Image<Scalar>& b) {
  if (!a.same_shape(b)) throw DataError("linf_distance: shape mismatch");
  return (a.data() - b.data()).abs().maxCoeff();
}

}  // namespace amod
