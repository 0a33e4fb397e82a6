#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fftconv/errors.hpp"

namespace fftconv {

// Dense rank-4 real array, row-major with batch outermost and column
// innermost, so each (batch, map) plane is contiguous. Holds feature maps
// and their gradients.
template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;

  Tensor4(std::size_t batch, std::size_t maps, std::size_t rows,
          std::size_t cols)
      : batch_(batch), maps_(maps), rows_(rows), cols_(cols) {
    if (batch == 0 || maps == 0 || rows == 0 || cols == 0)
      throw size_error("Tensor4: all dimensions must be >= 1");
    data_.assign(batch * maps * rows * cols, T{0});
  }

  std::size_t batch() const { return batch_; }
  std::size_t maps() const { return maps_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return rows_ * cols_; }

  T& at(std::size_t b, std::size_t m, std::size_t i, std::size_t j) {
    return data_[((b * maps_ + m) * rows_ + i) * cols_ + j];
  }
  T at(std::size_t b, std::size_t m, std::size_t i, std::size_t j) const {
    return data_[((b * maps_ + m) * rows_ + i) * cols_ + j];
  }

  std::span<T> plane(std::size_t b, std::size_t m) {
    return {data_.data() + (b * maps_ + m) * plane_size(), plane_size()};
  }
  std::span<const T> plane(std::size_t b, std::size_t m) const {
    return {data_.data() + (b * maps_ + m) * plane_size(), plane_size()};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Tensor4& o) const {
    return batch_ == o.batch_ && maps_ == o.maps_ && rows_ == o.rows_ &&
           cols_ == o.cols_;
  }

 private:
  std::size_t batch_ = 0, maps_ = 0, rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

// Square convolution kernels, out_maps outermost: w[o][i] is the k x k
// kernel connecting input map i to output map o.
template <typename T>
class Weights4 {
 public:
  Weights4() = default;

  Weights4(std::size_t out_maps, std::size_t in_maps, std::size_t kernel)
      : out_maps_(out_maps), in_maps_(in_maps), kernel_(kernel) {
    if (out_maps == 0 || in_maps == 0 || kernel == 0)
      throw size_error("Weights4: all dimensions must be >= 1");
    data_.assign(out_maps * in_maps * kernel * kernel, T{0});
  }

  std::size_t out_maps() const { return out_maps_; }
  std::size_t in_maps() const { return in_maps_; }
  std::size_t kernel() const { return kernel_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return kernel_ * kernel_; }

  T& at(std::size_t o, std::size_t i, std::size_t u, std::size_t v) {
    return data_[((o * in_maps_ + i) * kernel_ + u) * kernel_ + v];
  }
  T at(std::size_t o, std::size_t i, std::size_t u, std::size_t v) const {
    return data_[((o * in_maps_ + i) * kernel_ + u) * kernel_ + v];
  }

  std::span<T> plane(std::size_t o, std::size_t i) {
    return {data_.data() + (o * in_maps_ + i) * plane_size(), plane_size()};
  }
  std::span<const T> plane(std::size_t o, std::size_t i) const {
    return {data_.data() + (o * in_maps_ + i) * plane_size(), plane_size()};
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Weights4& o) const {
    return out_maps_ == o.out_maps_ && in_maps_ == o.in_maps_ &&
           kernel_ == o.kernel_;
  }

 private:
  std::size_t out_maps_ = 0, in_maps_ = 0, kernel_ = 0;
  std::vector<T> data_;
};

// Zero-extends every plane at the bottom/right so the original occupies the
// top-left block. Batch and map dimensions are unchanged.
template <typename T>
Tensor4<T> pad_to(const Tensor4<T>& t, std::size_t rows, std::size_t cols) {
  if (rows < t.rows() || cols < t.cols())
    throw size_error("pad_to: target smaller than source");
  Tensor4<T> out(t.batch(), t.maps(), rows, cols);
  for (std::size_t b = 0; b < t.batch(); ++b)
    for (std::size_t m = 0; m < t.maps(); ++m) {
      auto src = t.plane(b, m);
      auto dst = out.plane(b, m);
      for (std::size_t i = 0; i < t.rows(); ++i)
        std::copy_n(src.data() + i * t.cols(), t.cols(),
                    dst.data() + i * cols);
    }
  return out;
}

// Extracts the rows x cols window whose top-left corner is (row0, col0)
// from every plane.
template <typename T>
Tensor4<T> crop(const Tensor4<T>& t, std::size_t row0, std::size_t col0,
                std::size_t rows, std::size_t cols) {
  if (row0 + rows > t.rows() || col0 + cols > t.cols())
    throw size_error("crop: window out of bounds");
  Tensor4<T> out(t.batch(), t.maps(), rows, cols);
  for (std::size_t b = 0; b < t.batch(); ++b)
    for (std::size_t m = 0; m < t.maps(); ++m) {
      auto src = t.plane(b, m);
      auto dst = out.plane(b, m);
      for (std::size_t i = 0; i < rows; ++i)
        std::copy_n(src.data() + (row0 + i) * t.cols() + col0, cols,
                    dst.data() + i * cols);
    }
  return out;
}

// 180-degree spatial flip of every kernel: out[o,i,u,v] = w[o,i,k-1-u,k-1-v].
template <typename T>
Weights4<T> flip_spatial(const Weights4<T>& w) {
  const std::size_t k = w.kernel();
  Weights4<T> out(w.out_maps(), w.in_maps(), k);
  for (std::size_t o = 0; o < w.out_maps(); ++o)
    for (std::size_t i = 0; i < w.in_maps(); ++i)
      for (std::size_t u = 0; u < k; ++u)
        for (std::size_t v = 0; v < k; ++v)
          out.at(o, i, u, v) = w.at(o, i, k - 1 - u, k - 1 - v);
  return out;
}

template <typename T>
double max_abs(std::span<const T> v) {
  double m = 0;
  for (const T& x : v) m = std::max(m, std::abs(static_cast<double>(x)));
  return m;
}

template <typename T>
double max_abs_diff(std::span<const T> a, std::span<const T> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) -
                             static_cast<double>(b[i])));
  return m;
}

// Max elementwise difference relative to the sup norm of the reference.
template <typename T>
double max_rel_error(std::span<const T> got, std::span<const T> ref) {
  const double denom = std::max(max_abs(ref), 1e-30);
  return max_abs_diff(got, ref) / denom;
}

}  // namespace fftconv
