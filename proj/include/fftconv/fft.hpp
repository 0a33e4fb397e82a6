#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "fftconv/errors.hpp"
#include "fftconv/layer_config.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

// Immutable radix-2 plan: twiddle factors and the bit-reversal permutation
// for one transform length. Shareable across threads; transform() touches
// only the caller's buffer.
template <typename T>
class FftPlan {
 public:
  explicit FftPlan(std::size_t size) : m_(size) {
    if (!is_pow2(size))
      throw plan_error("fft plan: size " + std::to_string(size) +
                       " is not a power of 2");
    twiddle_.resize(m_ / 2);
    for (std::size_t j = 0; j < twiddle_.size(); ++j) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(j) /
                       static_cast<double>(m_);
      twiddle_[j] = {static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a))};
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < m_) ++bits;
    rev_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      rev_[i] = r;
    }
  }

  std::size_t size() const { return m_; }
  // twiddles()[j] = exp(-2*pi*i*j/size); stage `len` reads index j*(size/len).
  std::span<const std::complex<T>> twiddles() const { return twiddle_; }
  std::span<const std::size_t> bit_reversal() const { return rev_; }

  // In-place decimation-in-time transform. Forward is unnormalized; the
  // inverse conjugates the twiddles and applies the 1/size factor.
  void transform(std::span<std::complex<T>> data, bool inverse) const {
    if (data.size() != m_)
      throw size_error("fft: buffer length does not match plan size");
    if (m_ == 1) return;
    for (std::size_t i = 0; i < m_; ++i)
      if (i < rev_[i]) std::swap(data[i], data[rev_[i]]);
    for (std::size_t len = 2; len <= m_; len <<= 1) {
      const std::size_t half = len >> 1;
      const std::size_t stride = m_ / len;
      for (std::size_t start = 0; start < m_; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          std::complex<T> w = twiddle_[j * stride];
          if (inverse) w = std::conj(w);
          const std::complex<T> a = data[start + j];
          const std::complex<T> b = data[start + j + half] * w;
          data[start + j] = a + b;
          data[start + j + half] = a - b;
        }
      }
    }
    if (inverse) {
      const T scale = T(1) / static_cast<T>(m_);
      for (auto& z : data) z *= scale;
    }
  }

 private:
  std::size_t m_;
  std::vector<std::complex<T>> twiddle_;
  std::vector<std::size_t> rev_;
};

template <typename T>
std::vector<std::complex<T>> fft_1d(const FftPlan<T>& plan,
                                    std::span<const std::complex<T>> signal) {
  if (signal.size() != plan.size())
    throw size_error("fft_1d: signal length does not match plan size");
  std::vector<std::complex<T>> out(signal.begin(), signal.end());
  plan.transform(out, false);
  return out;
}

template <typename T>
std::vector<std::complex<T>> ifft_1d(
    const FftPlan<T>& plan, std::span<const std::complex<T>> spectrum) {
  if (spectrum.size() != plan.size())
    throw size_error("ifft_1d: spectrum length does not match plan size");
  std::vector<std::complex<T>> out(spectrum.begin(), spectrum.end());
  plan.transform(out, true);
  return out;
}

// Packed 2-D spectra of real m x m planes. Only columns 0..m/2 are stored;
// the rest follow from full[u,v] = conj(full[(m-u)%m, (m-v)%m]).
template <typename T>
class HalfSpectrum {
 public:
  HalfSpectrum() = default;

  HalfSpectrum(std::size_t batch, std::size_t maps, std::size_t m)
      : batch_(batch), maps_(maps), rows_(m), packed_cols_(m / 2 + 1) {
    if (batch == 0 || maps == 0 || m == 0)
      throw size_error("HalfSpectrum: all dimensions must be >= 1");
    data_.assign(batch * maps * rows_ * packed_cols_, std::complex<T>{});
  }

  std::size_t batch() const { return batch_; }
  std::size_t maps() const { return maps_; }
  std::size_t rows() const { return rows_; }
  std::size_t packed_cols() const { return packed_cols_; }
  std::size_t plane_size() const { return rows_ * packed_cols_; }

  std::span<std::complex<T>> plane(std::size_t b, std::size_t m) {
    return {data_.data() + (b * maps_ + m) * plane_size(), plane_size()};
  }
  std::span<const std::complex<T>> plane(std::size_t b, std::size_t m) const {
    return {data_.data() + (b * maps_ + m) * plane_size(), plane_size()};
  }

  std::complex<T> packed_bin(std::size_t b, std::size_t m, std::size_t u,
                             std::size_t v) const {
    return data_[((b * maps_ + m) * rows_ + u) * packed_cols_ + v];
  }
  std::complex<T>& packed_bin(std::size_t b, std::size_t m, std::size_t u,
                              std::size_t v) {
    return data_[((b * maps_ + m) * rows_ + u) * packed_cols_ + v];
  }

  // Any bin of the full m x m spectrum, unpacking by Hermitian symmetry.
  std::complex<T> full_bin(std::size_t b, std::size_t m, std::size_t u,
                           std::size_t v) const {
    if (v < packed_cols_) return packed_bin(b, m, u, v);
    return std::conj(packed_bin(b, m, (rows_ - u) % rows_, rows_ - v));
  }

  std::span<std::complex<T>> data() { return data_; }
  std::span<const std::complex<T>> data() const { return data_; }

 private:
  std::size_t batch_ = 0, maps_ = 0, rows_ = 0, packed_cols_ = 0;
  std::vector<std::complex<T>> data_;
};

namespace detail {

// Forward 2-D transform of one real plane. src is a src_rows x src_cols
// block sitting in the top-left corner of an implicitly zero m x m plane,
// so only src_rows row transforms are needed; the column pass covers just
// the m/2+1 packed columns. out must hold m*(m/2+1) values, line m values.
template <typename T>
void r2c_plane(const FftPlan<T>& plan, const T* src, std::size_t src_rows,
               std::size_t src_cols, std::complex<T>* out,
               std::span<std::complex<T>> line) {
  const std::size_t m = plan.size();
  const std::size_t pc = m / 2 + 1;
  std::fill(out, out + m * pc, std::complex<T>{});
  for (std::size_t i = 0; i < src_rows; ++i) {
    for (std::size_t j = 0; j < src_cols; ++j)
      line[j] = std::complex<T>(src[i * src_cols + j], T{0});
    std::fill(line.begin() + src_cols, line.end(), std::complex<T>{});
    plan.transform(line, false);
    std::copy_n(line.begin(), pc, out + i * pc);
  }
  for (std::size_t v = 0; v < pc; ++v) {
    for (std::size_t u = 0; u < m; ++u) line[u] = out[u * pc + v];
    plan.transform(line, false);
    for (std::size_t u = 0; u < m; ++u) out[u * pc + v] = line[u];
  }
}

// Inverse of r2c_plane, consuming the packed buffer in place. Only the
// out_rows x out_cols corner of the real m x m result is produced; each
// requested row is rebuilt to full width from its Hermitian half first.
template <typename T>
void c2r_plane(const FftPlan<T>& plan, std::complex<T>* half, T* dst,
               std::size_t out_rows, std::size_t out_cols,
               std::span<std::complex<T>> line) {
  const std::size_t m = plan.size();
  const std::size_t pc = m / 2 + 1;
  for (std::size_t v = 0; v < pc; ++v) {
    for (std::size_t u = 0; u < m; ++u) line[u] = half[u * pc + v];
    plan.transform(line, true);
    for (std::size_t u = 0; u < m; ++u) half[u * pc + v] = line[u];
  }
  for (std::size_t i = 0; i < out_rows; ++i) {
    for (std::size_t v = 0; v < pc; ++v) line[v] = half[i * pc + v];
    for (std::size_t v = pc; v < m; ++v)
      line[v] = std::conj(half[i * pc + (m - v)]);
    plan.transform(line, true);
    for (std::size_t j = 0; j < out_cols; ++j)
      dst[i * out_cols + j] = line[j].real();
  }
}

}  // namespace detail

// Packed 2-D forward transform of every (batch, map) plane. Input must be
// padded to the plan size on both axes beforehand.
template <typename T>
HalfSpectrum<T> fft_2d_real_batch(const FftPlan<T>& plan,
                                  const Tensor4<T>& t) {
  const std::size_t m = plan.size();
  if (t.rows() != m || t.cols() != m)
    throw size_error("fft_2d_real_batch: planes must be padded to the plan size");
  HalfSpectrum<T> s(t.batch(), t.maps(), m);
  std::vector<std::complex<T>> line(m);
  for (std::size_t b = 0; b < t.batch(); ++b)
    for (std::size_t f = 0; f < t.maps(); ++f)
      detail::r2c_plane(plan, t.plane(b, f).data(), m, m,
                        s.plane(b, f).data(),
                        std::span<std::complex<T>>(line));
  return s;
}

// Inverse of fft_2d_real_batch; yields full real m x m planes.
template <typename T>
Tensor4<T> ifft_2d_real_batch(const FftPlan<T>& plan,
                              const HalfSpectrum<T>& s) {
  const std::size_t m = plan.size();
  if (s.rows() != m)
    throw size_error("ifft_2d_real_batch: spectrum rows do not match plan size");
  Tensor4<T> t(s.batch(), s.maps(), m, m);
  std::vector<std::complex<T>> half(s.plane_size());
  std::vector<std::complex<T>> line(m);
  for (std::size_t b = 0; b < s.batch(); ++b)
    for (std::size_t f = 0; f < s.maps(); ++f) {
      auto src = s.plane(b, f);
      std::copy(src.begin(), src.end(), half.begin());
      detail::c2r_plane(plan, half.data(), t.plane(b, f).data(), m, m,
                        std::span<std::complex<T>>(line));
    }
  return t;
}

}  // namespace fftconv
