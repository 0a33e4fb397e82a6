#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fftconv/conv_direct.hpp"
#include "fftconv/conv_fft.hpp"
#include "fftconv/errors.hpp"
#include "fftconv/layer_config.hpp"
#include "fftconv/rng.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

enum class BenchOp { output, gradinput, gradweight };
enum class Method { direct, fft };

inline const char* op_name(BenchOp op) {
  switch (op) {
    case BenchOp::output: return "updateOutput";
    case BenchOp::gradinput: return "updateGradInput";
    case BenchOp::gradweight: return "accGradParameters";
  }
  return "?";
}

inline const char* method_name(Method m) {
  return m == Method::direct ? "direct" : "fft";
}

struct BenchStats {
  double mean_ms = 0, std_ms = 0, min_ms = 0, median_ms = 0;
};

struct BenchResult {
  BenchOp op = BenchOp::output;
  Method method = Method::direct;
  LayerConfig config;
  std::size_t iters = 0, warmup = 0;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  BenchStats stats;
  double checksum = 0;
  // set for updateGradInput on a network's first layer, which never runs it
  bool skipped = false;
};

inline BenchStats summarize_ms(std::vector<double> samples) {
  BenchStats s;
  if (samples.empty()) return s;
  const std::size_t n = samples.size();
  double sum = 0;
  s.min_ms = samples.front();
  for (double v : samples) {
    sum += v;
    s.min_ms = std::min(s.min_ms, v);
  }
  s.mean_ms = sum / static_cast<double>(n);
  if (n > 1) {
    double sq = 0;
    for (double v : samples) sq += (v - s.mean_ms) * (v - s.mean_ms);
    s.std_ms = std::sqrt(sq / static_cast<double>(n - 1));
  }
  std::sort(samples.begin(), samples.end());
  s.median_ms = n % 2 ? samples[n / 2]
                      : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return s;
}

// Times one operation under one method. Inputs are regenerated from the
// seed so every method sees identical values; the checksum (sum of output
// elements) guards against dead-code elimination and doubles as a
// determinism probe. Workspace setup happens before the clock starts; the
// transforms themselves are always inside it.
template <typename T>
BenchResult run_op_bench(const LayerConfig& cfg, BenchOp op, Method method,
                         std::size_t iters, std::size_t warmup,
                         unsigned threads, std::uint64_t seed,
                         bool first_layer = false) {
  cfg.validate();
  if (iters < 1) throw config_error("bench: iters must be >= 1");
  BenchResult r;
  r.op = op;
  r.method = method;
  r.config = cfg;
  r.iters = iters;
  r.warmup = warmup;
  r.threads = threads;
  r.seed = seed;
  if (op == BenchOp::gradinput && first_layer) {
    r.skipped = true;
    return r;
  }

  const std::size_t no = cfg.output_size();
  Tensor4<T> x(cfg.batch, cfg.in_maps, cfg.image, cfg.image);
  Weights4<T> w(cfg.out_maps, cfg.in_maps, cfg.kernel);
  Tensor4<T> gy(cfg.batch, cfg.out_maps, no, no);
  fill_uniform<T>(x.data(), seed, TensorRole::input);
  fill_uniform<T>(w.data(), seed, TensorRole::weights);
  fill_uniform<T>(gy.data(), seed, TensorRole::grad_output);

  std::optional<ConvWorkspace<T>> ws;
  if (method == Method::fft) ws.emplace(std::vector<LayerConfig>{cfg});

  const auto run_once = [&]() -> double {
    double sum = 0;
    const auto add = [&sum](std::span<const T> v) {
      for (T e : v) sum += static_cast<double>(e);
    };
    switch (op) {
      case BenchOp::output:
        add(method == Method::fft ? ws->forward(x, w, threads).data()
                                  : forward_direct(x, w, threads).data());
        break;
      case BenchOp::gradinput:
        add(method == Method::fft ? ws->grad_input(gy, w, threads).data()
                                  : grad_input_direct(gy, w, threads).data());
        break;
      case BenchOp::gradweight:
        add(method == Method::fft ? ws->grad_weight(gy, x, threads).data()
                                  : grad_weight_direct(gy, x, threads).data());
        break;
    }
    return sum;
  };

  using clk = std::chrono::steady_clock;
  for (std::size_t i = 0; i < warmup; ++i) (void)run_once();
  std::vector<double> samples;
  samples.reserve(iters);
  for (std::size_t i = 0; i < iters; ++i) {
    const auto t0 = clk::now();
    r.checksum = run_once();
    samples.push_back(
        std::chrono::duration<double, std::milli>(clk::now() - t0).count());
  }
  r.stats = summarize_ms(std::move(samples));
  return r;
}

// ---------------------------------------------------------------------------
// FFT-vs-direct verification sweep

struct VerifyResult {
  std::size_t configs = 0;
  double max_err_forward = 0;
  double max_err_grad_input = 0;
  double max_err_grad_weight = 0;

  bool within(double tol_fwd, double tol_gi, double tol_gw) const {
    return max_err_forward <= tol_fwd && max_err_grad_input <= tol_gi &&
           max_err_grad_weight <= tol_gw;
  }
};

// Random layer shapes small enough to compare against the direct oracle
// quickly: n <= 32, k <= 11, S <= 4, f and f' <= 8.
inline std::vector<LayerConfig> random_verify_configs(std::size_t count,
                                                      std::uint64_t seed) {
  std::vector<LayerConfig> cfgs;
  cfgs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto draw = [&](std::uint64_t salt, std::size_t lo, std::size_t hi) {
      const std::uint64_t h =
          detail::splitmix64(seed ^ detail::splitmix64(i * 6364136223846793005ULL + salt));
      return lo + static_cast<std::size_t>(h % (hi - lo + 1));
    };
    LayerConfig c;
    c.image = draw(1, 2, 32);
    c.kernel = draw(2, 1, std::min<std::size_t>(11, c.image));
    c.in_maps = draw(3, 1, 8);
    c.out_maps = draw(4, 1, 8);
    c.batch = draw(5, 1, 4);
    cfgs.push_back(c);
  }
  return cfgs;
}

// Runs all three operations both ways on every config and keeps the worst
// relative error per operation.
template <typename T>
VerifyResult verify_sweep(const std::vector<LayerConfig>& cfgs,
                          unsigned threads, std::uint64_t seed) {
  VerifyResult out;
  out.configs = cfgs.size();
  if (cfgs.empty()) return out;
  ConvWorkspace<T> ws(cfgs);
  for (const LayerConfig& cfg : cfgs) {
    const std::size_t no = cfg.output_size();
    Tensor4<T> x(cfg.batch, cfg.in_maps, cfg.image, cfg.image);
    Weights4<T> w(cfg.out_maps, cfg.in_maps, cfg.kernel);
    Tensor4<T> gy(cfg.batch, cfg.out_maps, no, no);
    fill_uniform<T>(x.data(), seed, TensorRole::input);
    fill_uniform<T>(w.data(), seed, TensorRole::weights);
    fill_uniform<T>(gy.data(), seed, TensorRole::grad_output);

    Tensor4<T> y_ref = forward_direct(x, w, threads);
    Tensor4<T> y = ws.forward(x, w, threads);
    out.max_err_forward = std::max(
        out.max_err_forward,
        max_rel_error<T>(y.data(), y_ref.data()));

    Tensor4<T> gx_ref = grad_input_direct(gy, w, threads);
    Tensor4<T> gx = ws.grad_input(gy, w, threads);
    out.max_err_grad_input = std::max(
        out.max_err_grad_input,
        max_rel_error<T>(gx.data(), gx_ref.data()));

    Weights4<T> gw_ref = grad_weight_direct(gy, x, threads);
    Weights4<T> gw = ws.grad_weight(gy, x, threads);
    out.max_err_grad_weight = std::max(
        out.max_err_grad_weight,
        max_rel_error<T>(gw.data(), gw_ref.data()));
  }
  return out;
}

}  // namespace fftconv
