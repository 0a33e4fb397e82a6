#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "fftconv/conv_direct.hpp"
#include "fftconv/errors.hpp"
#include "fftconv/fft.hpp"
#include "fftconv/layer_config.hpp"
#include "fftconv/parallel.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

// Work performed by the FFT path, tracked analytically: whole-plane 2-D
// transforms and complex multiply-adds in the per-bin product stage. For a
// given (n, S, f, f') these are the same for every kernel size.
struct OpCounters {
  std::uint64_t forward_transforms = 0;
  std::uint64_t inverse_transforms = 0;
  std::uint64_t complex_macs = 0;

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

// Reusable buffers for the FFT convolution path. Frequency data is stored
// bin-major: for each of the m*(m/2+1) stored bins there is a contiguous
// tile holding that bin across all planes of a role, so the per-bin products
// run as dense complex matrix multiplies:
//   x tile: f rows of S values      (bin of every input plane)
//   w tile: f' rows of f values     (bin of every kernel plane)
//   y tile: f' rows of S values     (bin of every output plane)
// Buffers are sized once for the largest registered layer and reused by
// anything smaller. A workspace serves one invocation at a time; the
// invocation parallelizes internally over planes and over bins.
template <typename T>
class ConvWorkspace {
 public:
  explicit ConvWorkspace(const std::vector<LayerConfig>& configs) {
    if (configs.empty())
      throw config_error("workspace: at least one layer config required");
    for (const LayerConfig& c : configs) {
      c.validate();
      const std::uint64_t m = c.fft_size();
      const std::uint64_t bins = m * (m / 2 + 1);
      cap_x_ = std::max(cap_x_, bins * c.batch * c.in_maps);
      cap_w_ = std::max(cap_w_, bins * c.out_maps * c.in_maps);
      cap_y_ = std::max(cap_y_, bins * c.batch * c.out_maps);
      max_m_ = std::max<std::size_t>(max_m_, m);
    }
    x_bins_.assign(cap_x_, std::complex<T>{});
    w_bins_.assign(cap_w_, std::complex<T>{});
    y_bins_.assign(cap_y_, std::complex<T>{});
  }

  std::size_t max_fft_size() const { return max_m_; }
  std::uint64_t capacity_x() const { return cap_x_; }
  std::uint64_t capacity_w() const { return cap_w_; }
  std::uint64_t capacity_y() const { return cap_y_; }

  // Bytes held by the three frequency-domain buffers.
  std::uint64_t frequency_bytes() const {
    return (cap_x_ + cap_w_ + cap_y_) *
           static_cast<std::uint64_t>(sizeof(std::complex<T>));
  }

  const OpCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = OpCounters{}; }

  Tensor4<T> forward(const Tensor4<T>& x, const Weights4<T>& w,
                     unsigned threads = 1) {
    detail::require_square(x, "forward_fft");
    if (w.in_maps() != x.maps())
      throw shape_error("forward_fft: weight in_maps != input maps");
    if (w.kernel() > x.rows())
      throw size_error("forward_fft: kernel larger than image");
    const std::size_t S = x.batch(), fin = x.maps(), fout = w.out_maps();
    const std::size_t n = x.rows(), k = w.kernel(), no = n - k + 1;
    const FftPlan<T>& plan = prepare({k, n, fin, fout, S});
    const std::size_t bins = bin_count(plan.size());

    transform_planes(plan, x, x_bins_.data(), fin * S, threads);
    transform_kernels(plan, w, threads);

    // per bin: Y[o][b] += conj(W[o][f]) * X[f][b]
    parallel_for(bins, threads, [&](unsigned, std::size_t begin, std::size_t end) {
      std::fill(y_bins_.begin() + begin * fout * S,
                y_bins_.begin() + end * fout * S, std::complex<T>{});
      for (std::size_t t = begin; t < end; ++t) {
        const std::complex<T>* xt = x_bins_.data() + t * fin * S;
        const std::complex<T>* wt = w_bins_.data() + t * fout * fin;
        std::complex<T>* yt = y_bins_.data() + t * fout * S;
        for (std::size_t o = 0; o < fout; ++o) {
          std::complex<T>* yrow = yt + o * S;
          const std::complex<T>* wrow = wt + o * fin;
          for (std::size_t f = 0; f < fin; ++f) {
            const std::complex<T> c = std::conj(wrow[f]);
            const std::complex<T>* xrow = xt + f * S;
            for (std::size_t b = 0; b < S; ++b) yrow[b] += c * xrow[b];
          }
        }
      }
    });
    counters_.complex_macs += std::uint64_t{bins} * fout * fin * S;

    Tensor4<T> y(S, fout, no, no);
    inverse_planes(plan, y_bins_.data(), y, threads);
    return y;
  }

  Tensor4<T> grad_input(const Tensor4<T>& gy, const Weights4<T>& w,
                        unsigned threads = 1) {
    detail::require_square(gy, "grad_input_fft");
    if (w.out_maps() != gy.maps())
      throw shape_error("grad_input_fft: weight out_maps != gradient maps");
    const std::size_t S = gy.batch(), fout = gy.maps(), fin = w.in_maps();
    const std::size_t no = gy.rows(), k = w.kernel(), n = no + k - 1;
    const FftPlan<T>& plan = prepare({k, n, fin, fout, S});
    const std::size_t bins = bin_count(plan.size());

    transform_planes(plan, gy, y_bins_.data(), fout * S, threads);
    transform_kernels(plan, w, threads);

    // per bin: X[f][b] += W[o][f] * Y[o][b]
    parallel_for(bins, threads, [&](unsigned, std::size_t begin, std::size_t end) {
      std::fill(x_bins_.begin() + begin * fin * S,
                x_bins_.begin() + end * fin * S, std::complex<T>{});
      for (std::size_t t = begin; t < end; ++t) {
        std::complex<T>* xt = x_bins_.data() + t * fin * S;
        const std::complex<T>* wt = w_bins_.data() + t * fout * fin;
        const std::complex<T>* yt = y_bins_.data() + t * fout * S;
        for (std::size_t o = 0; o < fout; ++o) {
          const std::complex<T>* yrow = yt + o * S;
          const std::complex<T>* wrow = wt + o * fin;
          for (std::size_t f = 0; f < fin; ++f) {
            const std::complex<T> c = wrow[f];
            std::complex<T>* xrow = xt + f * S;
            for (std::size_t b = 0; b < S; ++b) xrow[b] += c * yrow[b];
          }
        }
      }
    });
    counters_.complex_macs += std::uint64_t{bins} * fout * fin * S;

    Tensor4<T> gx(S, fin, n, n);
    inverse_planes(plan, x_bins_.data(), gx, threads);
    return gx;
  }

  Weights4<T> grad_weight(const Tensor4<T>& gy, const Tensor4<T>& x,
                          unsigned threads = 1) {
    detail::require_square(gy, "grad_weight_fft");
    detail::require_square(x, "grad_weight_fft");
    if (gy.batch() != x.batch())
      throw shape_error("grad_weight_fft: batch mismatch");
    const std::size_t no = gy.rows(), n = x.rows();
    if (no > n) throw size_error("grad_weight_fft: gradient larger than input");
    const std::size_t k = n - no + 1;
    const std::size_t S = x.batch(), fin = x.maps(), fout = gy.maps();
    const FftPlan<T>& plan = prepare({k, n, fin, fout, S});
    const std::size_t bins = bin_count(plan.size());

    transform_planes(plan, x, x_bins_.data(), fin * S, threads);
    transform_planes(plan, gy, y_bins_.data(), fout * S, threads);

    // per bin: W[o][f] += sum_b conj(GY[o][b]) * X[f][b]
    parallel_for(bins, threads, [&](unsigned, std::size_t begin, std::size_t end) {
      std::fill(w_bins_.begin() + begin * fout * fin,
                w_bins_.begin() + end * fout * fin, std::complex<T>{});
      for (std::size_t t = begin; t < end; ++t) {
        const std::complex<T>* xt = x_bins_.data() + t * fin * S;
        std::complex<T>* wt = w_bins_.data() + t * fout * fin;
        const std::complex<T>* yt = y_bins_.data() + t * fout * S;
        for (std::size_t o = 0; o < fout; ++o) {
          const std::complex<T>* yrow = yt + o * S;
          for (std::size_t f = 0; f < fin; ++f) {
            const std::complex<T>* xrow = xt + f * S;
            std::complex<T> acc{};
            for (std::size_t b = 0; b < S; ++b)
              acc += std::conj(yrow[b]) * xrow[b];
            wt[o * fin + f] += acc;
          }
        }
      }
    });
    counters_.complex_macs += std::uint64_t{bins} * fout * fin * S;

    Weights4<T> gw(fout, fin, k);
    ensure_scratch(threads, plan.size());
    parallel_for(fout * fin, threads,
                 [&](unsigned worker, std::size_t begin, std::size_t end) {
      auto [half, line] = worker_scratch(worker, plan.size());
      for (std::size_t idx = begin; idx < end; ++idx) {
        const std::size_t o = idx / fin, f = idx % fin;
        for (std::size_t t = 0; t < bins; ++t)
          half[t] = w_bins_[t * fout * fin + idx];
        detail::c2r_plane(plan, half.data(), gw.plane(o, f).data(), k, k, line);
      }
    });
    counters_.inverse_transforms += fout * fin;
    return gw;
  }

 private:
  static std::size_t bin_count(std::size_t m) { return m * (m / 2 + 1); }

  const FftPlan<T>& prepare(const LayerConfig& cfg) {
    cfg.validate();
    const std::size_t m = cfg.fft_size();
    const std::uint64_t bins = bin_count(m);
    if (bins * cfg.batch * cfg.in_maps > cap_x_ ||
        bins * cfg.out_maps * cfg.in_maps > cap_w_ ||
        bins * cfg.batch * cfg.out_maps > cap_y_)
      throw capacity_error("workspace too small for this layer");
    auto it = plans_.find(m);
    if (it == plans_.end()) it = plans_.emplace(m, FftPlan<T>(m)).first;
    return it->second;
  }

  // Must be called before a parallel stage; workers only slice afterwards.
  void ensure_scratch(unsigned threads, std::size_t m) {
    const std::size_t workers = std::max(1u, threads);
    const std::size_t need = bin_count(m) + m;
    if (scratch_.size() < workers) scratch_.resize(workers);
    for (std::size_t w = 0; w < workers; ++w)
      if (scratch_[w].size() < need) scratch_[w].resize(need);
  }

  std::pair<std::span<std::complex<T>>, std::span<std::complex<T>>>
  worker_scratch(unsigned worker, std::size_t m) {
    std::complex<T>* p = scratch_[worker].data();
    return {std::span(p, bin_count(m)), std::span(p + bin_count(m), m)};
  }

  // Transforms every plane of t (zero-padded to m x m) and scatters each
  // stored bin into its tile column. planes == t.batch()*t.maps(); the tile
  // row index is the plane's (map, batch) pair flattened map-major.
  void transform_planes(const FftPlan<T>& plan, const Tensor4<T>& t,
                        std::complex<T>* bins_out, std::size_t planes,
                        unsigned threads) {
    const std::size_t S = t.batch(), maps = t.maps();
    const std::size_t bins = bin_count(plan.size());
    ensure_scratch(threads, plan.size());
    parallel_for(planes, threads,
                 [&](unsigned worker, std::size_t begin, std::size_t end) {
      auto [half, line] = worker_scratch(worker, plan.size());
      for (std::size_t idx = begin; idx < end; ++idx) {
        const std::size_t b = idx / maps, f = idx % maps;
        detail::r2c_plane(plan, t.plane(b, f).data(), t.rows(), t.cols(),
                          half.data(), line);
        std::complex<T>* col = bins_out + f * S + b;
        for (std::size_t bin = 0; bin < bins; ++bin)
          col[bin * planes] = half[bin];
      }
    });
    counters_.forward_transforms += planes;
  }

  void transform_kernels(const FftPlan<T>& plan, const Weights4<T>& w,
                         unsigned threads) {
    const std::size_t fin = w.in_maps(), fout = w.out_maps(), k = w.kernel();
    const std::size_t planes = fout * fin;
    const std::size_t bins = bin_count(plan.size());
    ensure_scratch(threads, plan.size());
    parallel_for(planes, threads,
                 [&](unsigned worker, std::size_t begin, std::size_t end) {
      auto [half, line] = worker_scratch(worker, plan.size());
      for (std::size_t idx = begin; idx < end; ++idx) {
        detail::r2c_plane(plan, w.data().data() + idx * k * k, k, k,
                          half.data(), line);
        std::complex<T>* col = w_bins_.data() + idx;
        for (std::size_t bin = 0; bin < bins; ++bin)
          col[bin * planes] = half[bin];
      }
    });
    counters_.forward_transforms += planes;
  }

  // Gathers each output plane's bins, inverse-transforms, and writes the
  // top-left out.rows() x out.cols() window straight into the plane.
  void inverse_planes(const FftPlan<T>& plan, const std::complex<T>* bins_in,
                      Tensor4<T>& out, unsigned threads) {
    const std::size_t S = out.batch(), maps = out.maps();
    const std::size_t planes = S * maps;
    const std::size_t bins = bin_count(plan.size());
    ensure_scratch(threads, plan.size());
    parallel_for(planes, threads,
                 [&](unsigned worker, std::size_t begin, std::size_t end) {
      auto [half, line] = worker_scratch(worker, plan.size());
      for (std::size_t idx = begin; idx < end; ++idx) {
        const std::size_t b = idx / maps, f = idx % maps;
        const std::complex<T>* col = bins_in + f * S + b;
        for (std::size_t bin = 0; bin < bins; ++bin)
          half[bin] = col[bin * planes];
        detail::c2r_plane(plan, half.data(), out.plane(b, f).data(),
                          out.rows(), out.cols(), line);
      }
    });
    counters_.inverse_transforms += planes;
  }

  std::uint64_t cap_x_ = 0, cap_w_ = 0, cap_y_ = 0;
  std::size_t max_m_ = 1;
  std::vector<std::complex<T>> x_bins_, w_bins_, y_bins_;
  std::vector<std::vector<std::complex<T>>> scratch_;
  std::map<std::size_t, FftPlan<T>> plans_;
  OpCounters counters_;
};

template <typename T>
ConvWorkspace<T> workspace_for(const std::vector<LayerConfig>& configs) {
  return ConvWorkspace<T>(configs);
}

template <typename T>
Tensor4<T> forward_fft(ConvWorkspace<T>& ws, const Tensor4<T>& x,
                       const Weights4<T>& w, unsigned threads = 1) {
  return ws.forward(x, w, threads);
}

template <typename T>
Tensor4<T> grad_input_fft(ConvWorkspace<T>& ws, const Tensor4<T>& gy,
                          const Weights4<T>& w, unsigned threads = 1) {
  return ws.grad_input(gy, w, threads);
}

template <typename T>
Weights4<T> grad_weight_fft(ConvWorkspace<T>& ws, const Tensor4<T>& gy,
                            const Tensor4<T>& x, unsigned threads = 1) {
  return ws.grad_weight(gy, x, threads);
}

}  // namespace fftconv
