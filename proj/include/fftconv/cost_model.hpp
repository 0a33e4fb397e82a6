#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fftconv/errors.hpp"
#include "fftconv/layer_config.hpp"

namespace fftconv {

// Arithmetic-operation model for one layer. C is the hidden constant of the
// transform's O(n^2 log n) cost; log means log base 2 throughout, the
// natural reading for a radix-2 transform.
struct CostParams {
  LayerConfig config;
  double C = 2.5;
};

// Counts for one operation under both methods. The FFT total always splits
// into forward transforms, per-bin products, and inverse transforms.
struct OpCounts {
  double direct_ops = 0;
  double transform_ops = 0;
  double pointwise_ops = 0;
  double inverse_ops = 0;

  double fft_ops() const { return transform_ops + pointwise_ops + inverse_ops; }
};

namespace detail {

inline double xform_cost(double C, double n) {
  return n <= 1 ? 0.0 : 2.0 * C * n * n * std::log2(n);
}

}  // namespace detail

// Forward pass: direct = S*f'*f*n'^2*k^2; FFT transforms the inputs and
// kernels at size n, multiplies 4*S*f'*f*n^2, and inverse-transforms the
// S*f' outputs.
inline OpCounts ops_forward(const CostParams& p) {
  p.config.validate();
  const double S = p.config.batch, f = p.config.in_maps,
               fp = p.config.out_maps, n = p.config.image,
               k = p.config.kernel;
  const double no = p.config.output_size();
  OpCounts c;
  c.direct_ops = S * fp * f * no * no * k * k;
  const double t = detail::xform_cost(p.C, n);
  c.transform_ops = t * (S * f + fp * f);
  c.inverse_ops = t * (S * fp);
  c.pointwise_ops = 4.0 * S * fp * f * n * n;
  return c;
}

// Gradient w.r.t. the layer input: direct = S*f'*f*n^2*k^2; the FFT terms
// run at the output size n'.
inline OpCounts ops_grad_input(const CostParams& p) {
  p.config.validate();
  const double S = p.config.batch, f = p.config.in_maps,
               fp = p.config.out_maps, n = p.config.image,
               k = p.config.kernel;
  const double no = p.config.output_size();
  OpCounts c;
  c.direct_ops = S * fp * f * n * n * k * k;
  const double t = detail::xform_cost(p.C, no);
  c.transform_ops = t * (S * fp + fp * f);
  c.inverse_ops = t * (S * f);
  c.pointwise_ops = 4.0 * S * fp * f * no * no;
  return c;
}

// Gradient w.r.t. the weights: direct = S*f'*f*k^2*n'^2; FFT terms at size
// n, with f'*f planes coming back through the inverse transform.
inline OpCounts ops_grad_weight(const CostParams& p) {
  p.config.validate();
  const double S = p.config.batch, f = p.config.in_maps,
               fp = p.config.out_maps, n = p.config.image,
               k = p.config.kernel;
  const double no = p.config.output_size();
  OpCounts c;
  c.direct_ops = S * fp * f * k * k * no * no;
  const double t = detail::xform_cost(p.C, n);
  c.transform_ops = t * (S * fp + S * f);
  c.inverse_ops = t * (fp * f);
  c.pointwise_ops = 4.0 * S * fp * f * n * n;
  return c;
}

// Frequency-domain footprint of one layer under the half-count n(n+1)/2
// complex values per plane at 8 bytes each: 4n(n+1)(S*f + S*f' + f*f').
inline std::uint64_t memory_bytes(const LayerConfig& c) {
  c.validate();
  const std::uint64_t S = c.batch, f = c.in_maps, fp = c.out_maps,
                      n = c.image;
  return 4 * n * (n + 1) * (S * f + S * fp + f * fp);
}

// Footprint with the packing this implementation actually allocates:
// m*(m/2+1) complex values per plane, m the padded transform size, at
// 2*scalar_bytes per complex value.
inline std::uint64_t packed_memory_bytes(const LayerConfig& c,
                                         std::uint64_t scalar_bytes) {
  c.validate();
  const std::uint64_t S = c.batch, f = c.in_maps, fp = c.out_maps;
  const std::uint64_t m = c.fft_size();
  const std::uint64_t bins = m * (m / 2 + 1);
  return (S * f + S * fp + f * fp) * bins * 2 * scalar_bytes;
}

// Whether model formulas evaluate the FFT terms at n as given or at the
// power-of-2 size the engine would actually pad to.
enum class FftSizeMode { as_given, pad_pow2 };

struct CrossoverRow {
  std::size_t image = 0;
  double direct_ops = 0;
  double fft_ops = 0;
};

// Direct vs FFT forward-pass counts over a range of image sizes at fixed
// (k, f, f', S).
inline std::vector<CrossoverRow> crossover_table(
    std::size_t f, std::size_t fp, std::size_t S, std::size_t k, double C,
    const std::vector<std::size_t>& n_values,
    FftSizeMode mode = FftSizeMode::as_given) {
  if (n_values.empty())
    throw config_error("crossover table: at least one image size required");
  std::vector<CrossoverRow> rows;
  rows.reserve(n_values.size());
  for (std::size_t n : n_values) {
    CostParams p{{k, n, f, fp, S}, C};
    OpCounts at_n = ops_forward(p);
    CrossoverRow r;
    r.image = n;
    r.direct_ops = at_n.direct_ops;
    if (mode == FftSizeMode::pad_pow2 && !is_pow2(n)) {
      CostParams padded{{k, next_pow2(n), f, fp, S}, C};
      r.fft_ops = ops_forward(padded).fft_ops();
    } else {
      r.fft_ops = at_n.fft_ops();
    }
    rows.push_back(r);
  }
  return rows;
}

struct RamRow {
  std::size_t batch, image, in_maps, out_maps;
  std::uint64_t bytes;
  std::uint64_t megabytes;  // decimal MB, rounded to nearest
};

// The eight reference configurations used to sanity-check memory_bytes.
inline std::vector<RamRow> ram_table() {
  constexpr struct {
    std::size_t S, n, f, fp;
  } ref[] = {{128, 16, 96, 256},  {128, 32, 96, 256},  {64, 64, 96, 256},
             {128, 64, 96, 256},  {128, 16, 256, 384}, {128, 32, 256, 384},
             {128, 16, 384, 384}, {128, 32, 384, 384}};
  std::vector<RamRow> rows;
  for (const auto& r : ref) {
    const std::uint64_t bytes = memory_bytes({1, r.n, r.f, r.fp, r.S});
    rows.push_back({r.S, r.n, r.f, r.fp, bytes,
                    static_cast<std::uint64_t>(
                        std::llround(static_cast<double>(bytes) / 1e6))});
  }
  return rows;
}

}  // namespace fftconv
