#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fftconv/conv_direct.hpp"
#include "fftconv/conv_fft.hpp"
#include "fftconv/errors.hpp"
#include "fftconv/layer_config.hpp"
#include "fftconv/rng.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

// ---------------------------------------------------------------------------
// max pooling, 2x2 window, stride 2

template <typename T>
struct PoolResult {
  Tensor4<T> output;
  // flat index of the winning element inside its input plane, parallel to
  // output.data()
  std::vector<std::size_t> argmax;
  std::size_t in_rows = 0, in_cols = 0;
};

template <typename T>
PoolResult<T> maxpool_forward(const Tensor4<T>& x) {
  if (x.rows() % 2 != 0 || x.cols() % 2 != 0)
    throw size_error("maxpool: rows and cols must be even");
  const std::size_t rows = x.rows() / 2, cols = x.cols() / 2;
  PoolResult<T> r;
  r.output = Tensor4<T>(x.batch(), x.maps(), rows, cols);
  r.argmax.resize(r.output.size());
  r.in_rows = x.rows();
  r.in_cols = x.cols();
  std::size_t out_idx = 0;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t m = 0; m < x.maps(); ++m) {
      auto in = x.plane(b, m);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
          // ties go to the earliest element in row-major order
          std::size_t best = 2 * i * x.cols() + 2 * j;
          T best_v = in[best];
          for (std::size_t di = 0; di < 2; ++di)
            for (std::size_t dj = 0; dj < 2; ++dj) {
              const std::size_t p = (2 * i + di) * x.cols() + 2 * j + dj;
              if (in[p] > best_v) {
                best_v = in[p];
                best = p;
              }
            }
          r.output.at(b, m, i, j) = best_v;
          r.argmax[out_idx++] = best;
        }
    }
  return r;
}

// Routes each gradient element to the position that won its pooling window.
template <typename T>
Tensor4<T> maxpool_backward(const Tensor4<T>& gy, const PoolResult<T>& fwd) {
  if (!gy.same_shape(fwd.output))
    throw shape_error("maxpool backward: gradient shape mismatch");
  Tensor4<T> gx(gy.batch(), gy.maps(), fwd.in_rows, fwd.in_cols);
  std::size_t idx = 0;
  for (std::size_t b = 0; b < gy.batch(); ++b)
    for (std::size_t m = 0; m < gy.maps(); ++m) {
      auto out = gx.plane(b, m);
      auto g = gy.plane(b, m);
      for (std::size_t p = 0; p < gy.plane_size(); ++p)
        out[fwd.argmax[idx++]] += g[p];
    }
  return gx;
}

// ---------------------------------------------------------------------------
// rectified linear unit

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& x) {
  Tensor4<T> y(x.batch(), x.maps(), x.rows(), x.cols());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = in[i] > T{0} ? in[i] : T{0};
  return y;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& gy, const Tensor4<T>& x) {
  if (!gy.same_shape(x))
    throw shape_error("relu backward: gradient shape mismatch");
  Tensor4<T> gx(x.batch(), x.maps(), x.rows(), x.cols());
  auto in = x.data();
  auto g = gy.data();
  auto out = gx.data();
  for (std::size_t i = 0; i < in.size(); ++i)
    out[i] = in[i] > T{0} ? g[i] : T{0};
  return gx;
}

// ---------------------------------------------------------------------------
// fully connected layer

template <typename T>
struct FcLayer {
  std::size_t inputs = 0, outputs = 0;
  std::vector<T> weights;  // outputs x inputs, row-major
  std::vector<T> bias;     // outputs
};

// x is a batch of S flattened samples; returns S rows of scores.
template <typename T>
std::vector<T> fc_forward(const FcLayer<T>& fc, std::span<const T> x,
                          std::size_t S) {
  if (x.size() != S * fc.inputs)
    throw shape_error("fc forward: input length mismatch");
  std::vector<T> scores(S * fc.outputs);
  for (std::size_t s = 0; s < S; ++s) {
    const T* xi = x.data() + s * fc.inputs;
    for (std::size_t o = 0; o < fc.outputs; ++o) {
      const T* wo = fc.weights.data() + o * fc.inputs;
      T acc = fc.bias[o];
      for (std::size_t d = 0; d < fc.inputs; ++d) acc += wo[d] * xi[d];
      scores[s * fc.outputs + o] = acc;
    }
  }
  return scores;
}

template <typename T>
std::vector<T> fc_backward_data(const FcLayer<T>& fc, std::span<const T> gy,
                                std::size_t S) {
  if (gy.size() != S * fc.outputs)
    throw shape_error("fc backward: gradient length mismatch");
  std::vector<T> gx(S * fc.inputs, T{0});
  for (std::size_t s = 0; s < S; ++s) {
    T* gxi = gx.data() + s * fc.inputs;
    const T* gys = gy.data() + s * fc.outputs;
    for (std::size_t o = 0; o < fc.outputs; ++o) {
      const T g = gys[o];
      const T* wo = fc.weights.data() + o * fc.inputs;
      for (std::size_t d = 0; d < fc.inputs; ++d) gxi[d] += g * wo[d];
    }
  }
  return gx;
}

template <typename T>
std::pair<std::vector<T>, std::vector<T>> fc_backward_params(
    const FcLayer<T>& fc, std::span<const T> x, std::span<const T> gy,
    std::size_t S) {
  if (x.size() != S * fc.inputs || gy.size() != S * fc.outputs)
    throw shape_error("fc backward: length mismatch");
  std::vector<T> gw(fc.outputs * fc.inputs, T{0});
  std::vector<T> gb(fc.outputs, T{0});
  for (std::size_t s = 0; s < S; ++s) {
    const T* xi = x.data() + s * fc.inputs;
    const T* gys = gy.data() + s * fc.outputs;
    for (std::size_t o = 0; o < fc.outputs; ++o) {
      const T g = gys[o];
      gb[o] += g;
      T* gwo = gw.data() + o * fc.inputs;
      for (std::size_t d = 0; d < fc.inputs; ++d) gwo[d] += g * xi[d];
    }
  }
  return {std::move(gw), std::move(gb)};
}

// ---------------------------------------------------------------------------
// network description

enum class StageKind { conv, relu, pool, fc };

struct Stage {
  StageKind kind = StageKind::relu;
  // conv stages: kernel/image/in_maps/out_maps; batch is set when running
  LayerConfig conv{};
  std::size_t fc_outputs = 0;
};

// Static shape facts derived by walking the stage list.
struct NetShape {
  std::size_t conv_count = 0;
  std::size_t final_maps = 0, final_size = 0;
  bool has_fc = false;
  std::size_t fc_inputs = 0, fc_outputs = 0;
};

struct NetworkSpec {
  std::vector<Stage> stages;
  std::size_t input_maps = 0;   // maps of the batch fed to the first layer
  std::size_t input_image = 0;  // declared image size of the first layer
  std::size_t default_batch = 1;

  // Walks the stages checking map chaining, pooling parity, and fc
  // placement. Plane sizes are adapted to each conv layer's declared image
  // size (padded up or cropped down), so only map counts must chain exactly.
  NetShape shape() const {
    if (stages.empty()) throw config_error("network: no stages");
    if (stages.front().kind != StageKind::conv)
      throw config_error("network: first stage must be a convolution");
    NetShape out;
    std::size_t maps = stages.front().conv.in_maps;
    std::size_t size = 0;
    bool first = true;
    for (const Stage& st : stages) {
      if (out.has_fc)
        throw config_error("network: fc must be the last stage");
      switch (st.kind) {
        case StageKind::conv: {
          LayerConfig c = st.conv;
          c.batch = 1;
          c.validate();
          if (!first && c.in_maps != maps)
            throw config_error("network: conv expects " +
                               std::to_string(c.in_maps) + " maps but gets " +
                               std::to_string(maps));
          maps = c.out_maps;
          size = c.output_size();
          first = false;
          ++out.conv_count;
          break;
        }
        case StageKind::relu:
          break;
        case StageKind::pool:
          if (size % 2 != 0)
            throw config_error("network: pool needs an even plane size, got " +
                               std::to_string(size));
          size /= 2;
          break;
        case StageKind::fc:
          if (st.fc_outputs == 0)
            throw config_error("network: fc outputs must be >= 1");
          out.has_fc = true;
          out.fc_inputs = maps * size * size;
          out.fc_outputs = st.fc_outputs;
          break;
      }
    }
    out.final_maps = maps;
    out.final_size = size;
    return out;
  }

  void validate() const { (void)shape(); }
};

// Reads one stage per line: `conv k n f fp`, `relu`, `pool`, `fc outputs`.
// Blank lines and text after # are ignored.
inline NetworkSpec parse_network(std::istream& in) {
  NetworkSpec spec;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream line(raw);
    std::string word;
    if (!(line >> word)) continue;
    const auto want = [&](const char* what) {
      long long v;
      if (!(line >> v) || v < 1)
        throw config_error("network file line " + std::to_string(line_no) +
                           ": expected positive " + what);
      return static_cast<std::size_t>(v);
    };
    Stage st;
    if (word == "conv") {
      st.kind = StageKind::conv;
      st.conv.kernel = want("kernel size");
      st.conv.image = want("image size");
      st.conv.in_maps = want("input map count");
      st.conv.out_maps = want("output map count");
      st.conv.batch = 1;
    } else if (word == "relu") {
      st.kind = StageKind::relu;
    } else if (word == "pool") {
      st.kind = StageKind::pool;
    } else if (word == "fc") {
      st.kind = StageKind::fc;
      st.fc_outputs = want("output count");
    } else {
      throw config_error("network file line " + std::to_string(line_no) +
                         ": unknown stage '" + word + "'");
    }
    std::string extra;
    if (line >> extra)
      throw config_error("network file line " + std::to_string(line_no) +
                         ": unexpected token '" + extra + "'");
    spec.stages.push_back(st);
  }
  if (spec.stages.empty()) throw config_error("network file: no stages");
  if (spec.stages.front().kind == StageKind::conv) {
    spec.input_maps = spec.stages.front().conv.in_maps;
    spec.input_image = spec.stages.front().conv.image;
  }
  spec.validate();
  return spec;
}

inline NetworkSpec parse_network_string(const std::string& text) {
  std::istringstream in(text);
  return parse_network(in);
}

// Built-in five-convolution benchmark network; the small variant divides
// the map counts by 8 and uses a batch of 8 so it runs comfortably on a
// desktop.
inline NetworkSpec preset_network(const std::string& name) {
  std::string text;
  std::size_t batch = 0;
  if (name == "reference-net") {
    batch = 128;
    text =
        "conv 11 32 3 96\nrelu\n"
        "conv 7 32 96 256\nrelu\npool\n"
        "conv 5 16 256 384\nrelu\n"
        "conv 5 16 384 384\nrelu\n"
        "conv 3 16 384 384\nrelu\npool\n"
        "fc 1000\n";
  } else if (name == "reference-net-small") {
    batch = 8;
    text =
        "conv 11 32 3 12\nrelu\n"
        "conv 7 32 12 32\nrelu\npool\n"
        "conv 5 16 32 48\nrelu\n"
        "conv 5 16 48 48\nrelu\n"
        "conv 3 16 48 48\nrelu\npool\n"
        "fc 1000\n";
  } else {
    throw config_error("unknown preset '" + name + "'");
  }
  NetworkSpec spec = parse_network_string(text);
  spec.default_batch = batch;
  return spec;
}

// ---------------------------------------------------------------------------
// parameters and execution

template <typename T>
struct NetworkParams {
  std::vector<Weights4<T>> conv;  // one per conv stage, in order
  FcLayer<T> fc;
  bool has_fc = false;
};

template <typename T>
NetworkParams<T> init_params(const NetworkSpec& spec, std::uint64_t seed) {
  const NetShape sh = spec.shape();
  NetworkParams<T> p;
  std::size_t ci = 0;
  for (const Stage& st : spec.stages) {
    if (st.kind != StageKind::conv) continue;
    Weights4<T> w(st.conv.out_maps, st.conv.in_maps, st.conv.kernel);
    fill_uniform<T>(w.data(), seed, TensorRole::weights, ci);
    p.conv.push_back(std::move(w));
    ++ci;
  }
  if (sh.has_fc) {
    p.has_fc = true;
    p.fc.inputs = sh.fc_inputs;
    p.fc.outputs = sh.fc_outputs;
    p.fc.weights.resize(sh.fc_outputs * sh.fc_inputs);
    p.fc.bias.resize(sh.fc_outputs);
    fill_uniform<T>(std::span<T>(p.fc.weights), seed, TensorRole::fc_weights);
    fill_uniform<T>(std::span<T>(p.fc.bias), seed, TensorRole::fc_bias);
  }
  return p;
}

template <typename T>
Tensor4<T> make_batch(const NetworkSpec& spec, std::size_t S,
                      std::uint64_t seed) {
  Tensor4<T> x(S, spec.input_maps, spec.input_image, spec.input_image);
  fill_uniform<T>(x.data(), seed, TensorRole::input);
  return x;
}

// Pads or crops every plane (at the top-left corner) to size x size.
template <typename T>
Tensor4<T> fit_to(const Tensor4<T>& t, std::size_t size) {
  if (t.rows() == size && t.cols() == size) return t;
  Tensor4<T> out(t.batch(), t.maps(), size, size);
  const std::size_t rows = std::min(size, t.rows());
  const std::size_t cols = std::min(size, t.cols());
  for (std::size_t b = 0; b < t.batch(); ++b)
    for (std::size_t m = 0; m < t.maps(); ++m) {
      auto src = t.plane(b, m);
      auto dst = out.plane(b, m);
      for (std::size_t i = 0; i < rows; ++i)
        std::copy_n(src.data() + i * t.cols(), cols, dst.data() + i * size);
    }
  return out;
}

enum class Engine { direct, fft };

// Wall time spent in the three per-layer training operations, in the
// naming used by the usual training frameworks: updateOutput is the whole
// forward pass, updateGradInput the backward data path, accGradParameters
// the weight gradients.
struct StageTimes {
  double update_output_ms = 0;
  double update_grad_input_ms = 0;
  double acc_grad_ms = 0;

  double total_ms() const {
    return update_output_ms + update_grad_input_ms + acc_grad_ms;
  }
};

template <typename T>
struct IterationResult {
  StageTimes times;
  double loss = 0;
  std::vector<Weights4<T>> conv_weight_grads;
  std::vector<T> fc_weight_grad, fc_bias_grad;
  // number of conv layers that ran the backward data path; the first conv
  // layer never does (nothing upstream needs its input gradient)
  std::size_t grad_input_calls = 0;
  double grad_checksum = 0;
};

// One training iteration: forward through all stages, loss = sum of the
// final outputs (linear, so gradient checks need no extra machinery), then
// backward collecting every weight gradient. engines may override the
// conv engine per layer; otherwise `engine` applies to all of them.
template <typename T>
IterationResult<T> run_iteration(const NetworkSpec& spec,
                                 const NetworkParams<T>& params,
                                 const Tensor4<T>& batch, Engine engine,
                                 ConvWorkspace<T>* ws = nullptr,
                                 unsigned threads = 1,
                                 std::span<const Engine> engines = {}) {
  const NetShape sh = spec.shape();
  if (params.conv.size() != sh.conv_count)
    throw config_error("run_iteration: wrong number of weight tensors");
  if (batch.maps() != spec.input_maps)
    throw config_error("run_iteration: batch has " +
                       std::to_string(batch.maps()) + " maps, network wants " +
                       std::to_string(spec.input_maps));
  if (!engines.empty() && engines.size() != sh.conv_count)
    throw config_error("run_iteration: one engine override per conv layer");

  const auto conv_engine = [&](std::size_t ci) {
    return engines.empty() ? engine : engines[ci];
  };
  std::optional<ConvWorkspace<T>> local_ws;
  const bool any_fft = [&] {
    for (std::size_t ci = 0; ci < sh.conv_count; ++ci)
      if (conv_engine(ci) == Engine::fft) return true;
    return false;
  }();
  if (any_fft && ws == nullptr) {
    std::vector<LayerConfig> cfgs;
    for (const Stage& st : spec.stages)
      if (st.kind == StageKind::conv) {
        LayerConfig c = st.conv;
        c.batch = batch.batch();
        cfgs.push_back(c);
      }
    local_ws.emplace(cfgs);
    ws = &*local_ws;
  }

  using clk = std::chrono::steady_clock;
  IterationResult<T> res;
  const auto timed = [](double& bucket, auto&& fn) {
    const auto t0 = clk::now();
    fn();
    bucket += std::chrono::duration<double, std::milli>(clk::now() - t0)
                  .count();
  };

  // forward, keeping what the backward pass needs
  struct ConvRecord {
    Tensor4<T> input;           // adapted to the declared image size
    std::size_t pre_fit_size;   // plane size before adaptation
  };
  std::vector<ConvRecord> conv_rec;
  std::vector<Tensor4<T>> relu_rec;
  std::vector<PoolResult<T>> pool_rec;
  std::vector<T> fc_in;

  const std::size_t S = batch.batch();
  Tensor4<T> cur = batch;
  std::vector<T> scores;
  std::size_t ci = 0;
  timed(res.times.update_output_ms, [&] {
    for (const Stage& st : spec.stages) {
      switch (st.kind) {
        case StageKind::conv: {
          conv_rec.push_back({fit_to(cur, st.conv.image), cur.rows()});
          const Tensor4<T>& in = conv_rec.back().input;
          cur = conv_engine(ci) == Engine::fft
                    ? ws->forward(in, params.conv[ci], threads)
                    : forward_direct(in, params.conv[ci], threads);
          ++ci;
          break;
        }
        case StageKind::relu:
          relu_rec.push_back(cur);
          cur = relu_forward(cur);
          break;
        case StageKind::pool:
          pool_rec.push_back(maxpool_forward(cur));
          cur = pool_rec.back().output;
          break;
        case StageKind::fc: {
          fc_in.assign(cur.data().begin(), cur.data().end());
          scores = fc_forward(params.fc, std::span<const T>(fc_in), S);
          break;
        }
      }
    }
    if (sh.has_fc) {
      for (T v : scores) res.loss += static_cast<double>(v);
    } else {
      for (T v : cur.data()) res.loss += static_cast<double>(v);
    }
  });

  // backward; the loss is a plain sum so the seed gradient is all ones
  res.conv_weight_grads.resize(sh.conv_count);
  Tensor4<T> grad;
  if (sh.has_fc) {
    std::vector<T> gscores(S * sh.fc_outputs, T{1});
    timed(res.times.acc_grad_ms, [&] {
      auto [gw, gb] = fc_backward_params(params.fc,
                                         std::span<const T>(fc_in),
                                         std::span<const T>(gscores), S);
      res.fc_weight_grad = std::move(gw);
      res.fc_bias_grad = std::move(gb);
    });
    timed(res.times.update_grad_input_ms, [&] {
      std::vector<T> gflat =
          fc_backward_data(params.fc, std::span<const T>(gscores), S);
      grad = Tensor4<T>(S, sh.final_maps, sh.final_size, sh.final_size);
      std::copy(gflat.begin(), gflat.end(), grad.data().begin());
    });
  } else {
    grad = Tensor4<T>(S, sh.final_maps, sh.final_size, sh.final_size);
    std::fill(grad.data().begin(), grad.data().end(), T{1});
  }

  ci = sh.conv_count;
  auto relu_it = relu_rec.size();
  auto pool_it = pool_rec.size();
  for (std::size_t si = spec.stages.size(); si-- > 0;) {
    const Stage& st = spec.stages[si];
    switch (st.kind) {
      case StageKind::conv: {
        --ci;
        const ConvRecord& rec = conv_rec[ci];
        timed(res.times.acc_grad_ms, [&] {
          res.conv_weight_grads[ci] =
              conv_engine(ci) == Engine::fft
                  ? ws->grad_weight(grad, rec.input, threads)
                  : grad_weight_direct(grad, rec.input, threads);
        });
        if (ci > 0) {
          timed(res.times.update_grad_input_ms, [&] {
            Tensor4<T> gx =
                conv_engine(ci) == Engine::fft
                    ? ws->grad_input(grad, params.conv[ci], threads)
                    : grad_input_direct(grad, params.conv[ci], threads);
            grad = fit_to(gx, rec.pre_fit_size);
            ++res.grad_input_calls;
          });
        }
        break;
      }
      case StageKind::relu:
        --relu_it;
        timed(res.times.update_grad_input_ms, [&] {
          grad = relu_backward(grad, relu_rec[relu_it]);
        });
        break;
      case StageKind::pool:
        --pool_it;
        timed(res.times.update_grad_input_ms, [&] {
          grad = maxpool_backward(grad, pool_rec[pool_it]);
        });
        break;
      case StageKind::fc:
        break;  // handled above
    }
    if (ci == 0 && st.kind == StageKind::conv) break;
  }

  for (const Weights4<T>& g : res.conv_weight_grads)
    for (T v : g.data()) res.grad_checksum += static_cast<double>(v);
  for (T v : res.fc_weight_grad) res.grad_checksum += static_cast<double>(v);
  for (T v : res.fc_bias_grad) res.grad_checksum += static_cast<double>(v);
  return res;
}

}  // namespace fftconv
