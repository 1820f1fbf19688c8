#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <utility>

#include "pnp/errors.hpp"

namespace pnp {

// Planar image: channels stored back to back, each channel row-major.
// Values are nominally in [0,1] but are not clamped; solver iterates may
// leave the range transiently and only image export clamps.
template <typename Scalar>
class ImageT {
public:
  using VectorType = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using PlaneMap =
      Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstPlaneMap =
      Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  ImageT() = default;

  ImageT(Eigen::Index height, Eigen::Index width, Eigen::Index channels = 1)
      : height_(height), width_(width), channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0)
      throw DimensionError("image dimensions must be positive");
    data_ = VectorType::Zero(height * width * channels);
  }

  ImageT(Eigen::Index height, Eigen::Index width, Eigen::Index channels, VectorType data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height <= 0 || width <= 0 || channels <= 0)
      throw DimensionError("image dimensions must be positive");
    if (data_.size() != height * width * channels)
      throw DimensionError("image data length does not match dimensions");
  }

  static ImageT constant(Eigen::Index h, Eigen::Index w, Eigen::Index c, Scalar value) {
    ImageT img(h, w, c);
    img.data_.setConstant(value);
    return img;
  }

  Eigen::Index height() const { return height_; }
  Eigen::Index width() const { return width_; }
  Eigen::Index channels() const { return channels_; }
  Eigen::Index size() const { return data_.size(); }
  Eigen::Index pixels() const { return height_ * width_; }

  bool same_shape(const ImageT& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  Scalar& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index c = 0) {
    return data_[(c * height_ + i) * width_ + j];
  }
  Scalar operator()(Eigen::Index i, Eigen::Index j, Eigen::Index c = 0) const {
    return data_[(c * height_ + i) * width_ + j];
  }

  VectorType& array() { return data_; }
  const VectorType& array() const { return data_; }

  PlaneMap plane(Eigen::Index c) {
    return PlaneMap(data_.data() + c * height_ * width_, height_, width_);
  }
  ConstPlaneMap plane(Eigen::Index c) const {
    return ConstPlaneMap(data_.data() + c * height_ * width_, height_, width_);
  }

  bool all_finite() const { return data_.isFinite().all(); }

  Scalar squared_norm() const { return (data_ * data_).sum(); }
  Scalar norm() const { return std::sqrt(squared_norm()); }

  ImageT& operator+=(const ImageT& o) { check(o); data_ += o.data_; return *this; }
  ImageT& operator-=(const ImageT& o) { check(o); data_ -= o.data_; return *this; }
  ImageT& operator*=(Scalar s) { data_ *= s; return *this; }

  friend ImageT operator+(ImageT a, const ImageT& b) { a += b; return a; }
  friend ImageT operator-(ImageT a, const ImageT& b) { a -= b; return a; }
  friend ImageT operator*(Scalar s, ImageT a) { a *= s; return a; }
  friend ImageT operator*(ImageT a, Scalar s) { a *= s; return a; }

private:
  void check(const ImageT& o) const {
    if (!same_shape(o)) throw DimensionError("image shape mismatch");
  }

  Eigen::Index height_ = 0, width_ = 0, channels_ = 0;
  VectorType data_;
};

using Image = ImageT<double>;

template <typename Scalar>
Scalar dot(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
  if (!a.same_shape(b)) throw DimensionError("dot: image shape mismatch");
  return (a.array() * b.array()).sum();
}

template <typename Scalar>
ImageT<Scalar> like(const ImageT<Scalar>& proto) {
  return ImageT<Scalar>(proto.height(), proto.width(), proto.channels());
}

// Per-pixel {0,1} mask; applies to every channel of an image of matching size.
struct BinaryMask {
  Eigen::Index height = 0, width = 0;
  Eigen::Array<std::uint8_t, Eigen::Dynamic, 1> bits;  // row-major

  BinaryMask() = default;
  BinaryMask(Eigen::Index h, Eigen::Index w) : height(h), width(w) {
    if (h <= 0 || w <= 0) throw DimensionError("mask dimensions must be positive");
    bits = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>::Zero(h * w);
  }

  bool observed(Eigen::Index i, Eigen::Index j) const { return bits[i * width + j] != 0; }
  void set(Eigen::Index i, Eigen::Index j, bool v) { bits[i * width + j] = v ? 1 : 0; }
  Eigen::Index count_observed() const { return (bits != 0).count(); }
};

}  // namespace pnp
