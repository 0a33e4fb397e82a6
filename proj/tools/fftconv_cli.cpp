// Command-line harness: correctness sweeps, per-operation benchmarks, the
// composed-network benchmark, and cost-model reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fftconv/fftconv.hpp"

namespace {

std::string fmt_ms(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.3f", v);
  return b;
}

std::string fmt_val(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.9g", v);
  return b;
}

std::string fmt_count(double v) {
  char b[64];
  if (v < 9e15)
    std::snprintf(b, sizeof b, "%.0f", v);
  else
    std::snprintf(b, sizeof b, "%.4e", v);
  return b;
}

std::string fmt_sz(std::size_t v) { return std::to_string(v); }

struct CommonOpts {
  std::vector<std::size_t> config;  // k,n,f,fp
  std::size_t batch = 8;
  std::string op = "all";
  std::string method = "both";
  std::size_t iters = 10;
  std::size_t warmup = 3;
  unsigned threads = 0;
  std::uint64_t seed = 1234;
  std::string format = "md";
  std::string precision = "f32";
  std::string out;
  bool first_layer = false;
};

fftconv::LayerConfig config_from(const CommonOpts& o) {
  if (o.config.size() != 4)
    throw fftconv::config_error("--config expects k,n,f,fp");
  fftconv::LayerConfig c{o.config[0], o.config[1], o.config[2], o.config[3],
                         o.batch};
  c.validate();
  return c;
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw fftconv::config_error("cannot write " + out_path);
    f << text;
  }
}

// ---------------------------------------------------------------------------
// verify

struct VerifyTols {
  double forward, grad_input, grad_weight;
};

template <typename T>
bool verify_one(std::size_t count, unsigned threads, std::uint64_t seed,
                const char* label, const VerifyTols& tol, std::string& text) {
  const auto cfgs = fftconv::random_verify_configs(count, seed);
  const auto res = fftconv::verify_sweep<T>(cfgs, threads, seed);
  const bool ok =
      res.within(tol.forward, tol.grad_input, tol.grad_weight);
  char line[256];
  std::snprintf(line, sizeof line,
                "%s: configs=%zu max_rel_err forward=%.3e grad_input=%.3e "
                "grad_weight=%.3e tol=%.0e/%.0e/%.0e %s\n",
                label, res.configs, res.max_err_forward, res.max_err_grad_input,
                res.max_err_grad_weight, tol.forward, tol.grad_input,
                tol.grad_weight, ok ? "PASS" : "FAIL");
  text += line;
  return ok;
}

int cmd_verify(std::size_t count, const CommonOpts& o) {
  const unsigned threads = fftconv::resolve_threads(o.threads);
  std::string text;
  bool ok = verify_one<float>(count, threads, o.seed, "f32",
                              {1e-4, 1e-4, 1e-3}, text);
  ok &= verify_one<double>(count, threads, o.seed, "f64",
                           {1e-10, 1e-10, 1e-10}, text);
  emit(text, o.out);
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// bench

std::vector<fftconv::BenchOp> ops_from(const std::string& name) {
  using fftconv::BenchOp;
  if (name == "output") return {BenchOp::output};
  if (name == "gradinput") return {BenchOp::gradinput};
  if (name == "gradweight") return {BenchOp::gradweight};
  if (name == "all")
    return {BenchOp::output, BenchOp::gradinput, BenchOp::gradweight};
  throw fftconv::config_error("--op must be output|gradinput|gradweight|all");
}

std::vector<fftconv::Method> methods_from(const std::string& name) {
  using fftconv::Method;
  if (name == "direct") return {Method::direct};
  if (name == "fft") return {Method::fft};
  if (name == "both") return {Method::direct, Method::fft};
  throw fftconv::config_error("--method must be direct|fft|both");
}

template <typename T>
int cmd_bench(const CommonOpts& o) {
  const fftconv::LayerConfig cfg = config_from(o);
  const unsigned threads = fftconv::resolve_threads(o.threads);
  const auto ops = ops_from(o.op);
  const auto methods = methods_from(o.method);

  std::vector<fftconv::BenchResult> rows;
  for (fftconv::BenchOp op : ops)
    for (fftconv::Method m : methods)
      rows.push_back(fftconv::run_op_bench<T>(cfg, op, m, o.iters, o.warmup,
                                              threads, o.seed, o.first_layer));

  const bool md = o.format == "md";
  fftconv::Table table(
      md ? std::vector<std::string>{"op", "method", "mean_ms", "std_ms",
                                    "min_ms", "median_ms", "checksum"}
         : std::vector<std::string>{"op", "method", "k", "n", "f", "fprime",
                                    "S", "iters", "threads", "seed", "mean_ms",
                                    "std_ms", "min_ms", "checksum"});
  const auto add_row = [&](const std::string& op_label,
                           const std::string& method_label,
                           const fftconv::BenchStats& st, double checksum,
                           bool skipped) {
    std::vector<std::string> cells;
    if (md) {
      cells = {op_label, method_label};
      if (skipped) {
        cells.insert(cells.end(), {"skipped", "-", "-", "-", "-"});
      } else {
        cells.insert(cells.end(),
                     {fmt_ms(st.mean_ms), fmt_ms(st.std_ms), fmt_ms(st.min_ms),
                      fmt_ms(st.median_ms), fmt_val(checksum)});
      }
    } else {
      cells = {op_label,
               method_label,
               fmt_sz(cfg.kernel),
               fmt_sz(cfg.image),
               fmt_sz(cfg.in_maps),
               fmt_sz(cfg.out_maps),
               fmt_sz(cfg.batch),
               fmt_sz(o.iters),
               std::to_string(threads),
               std::to_string(o.seed)};
      if (skipped) {
        cells.insert(cells.end(), {"", "", "", ""});
      } else {
        cells.insert(cells.end(), {fmt_ms(st.mean_ms), fmt_ms(st.std_ms),
                                   fmt_ms(st.min_ms), fmt_val(checksum)});
      }
    }
    table.add_row(std::move(cells));
  };

  for (const auto& r : rows)
    add_row(fftconv::op_name(r.op), fftconv::method_name(r.method), r.stats,
            r.checksum, r.skipped);

  // per-method totals over the ops that actually ran
  for (fftconv::Method m : methods) {
    fftconv::BenchStats total;
    double checksum = 0;
    for (const auto& r : rows) {
      if (r.method != m || r.skipped) continue;
      total.mean_ms += r.stats.mean_ms;
      total.std_ms += r.stats.std_ms * r.stats.std_ms;
      total.min_ms += r.stats.min_ms;
      total.median_ms += r.stats.median_ms;
      checksum += r.checksum;
    }
    total.std_ms = std::sqrt(total.std_ms);
    add_row("Total", fftconv::method_name(m), total, checksum, false);
  }

  emit(md ? table.markdown() : table.csv(), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// net

template <typename T>
int cmd_net(const std::string& preset, const std::string& spec_file,
            const CommonOpts& o, bool batch_given) {
  fftconv::NetworkSpec spec;
  if (!preset.empty()) {
    spec = fftconv::preset_network(preset);
  } else if (!spec_file.empty()) {
    std::ifstream f(spec_file);
    if (!f) throw fftconv::config_error("cannot read " + spec_file);
    spec = fftconv::parse_network(f);
  } else {
    throw fftconv::config_error("net: give --preset or --spec");
  }
  const std::size_t S = batch_given ? o.batch : spec.default_batch;
  const unsigned threads = fftconv::resolve_threads(o.threads);
  const auto methods = methods_from(o.method);

  const auto params = fftconv::init_params<T>(spec, o.seed);
  const auto batch = fftconv::make_batch<T>(spec, S, o.seed);

  std::vector<fftconv::LayerConfig> cfgs;
  for (const auto& st : spec.stages)
    if (st.kind == fftconv::StageKind::conv) {
      fftconv::LayerConfig c = st.conv;
      c.batch = S;
      cfgs.push_back(c);
    }

  fftconv::Table table({"method", "updateOutput_ms", "updateGradInput_ms",
                        "accGradParameters_ms", "total_ms", "checksum"});
  for (fftconv::Method m : methods) {
    const auto engine = m == fftconv::Method::fft ? fftconv::Engine::fft
                                                  : fftconv::Engine::direct;
    std::optional<fftconv::ConvWorkspace<T>> ws;
    if (engine == fftconv::Engine::fft) ws.emplace(cfgs);
    fftconv::ConvWorkspace<T>* wsp = ws ? &*ws : nullptr;

    for (std::size_t i = 0; i < o.warmup; ++i)
      (void)fftconv::run_iteration(spec, params, batch, engine, wsp, threads);
    fftconv::StageTimes acc;
    double checksum = 0;
    for (std::size_t i = 0; i < o.iters; ++i) {
      const auto res =
          fftconv::run_iteration(spec, params, batch, engine, wsp, threads);
      acc.update_output_ms += res.times.update_output_ms;
      acc.update_grad_input_ms += res.times.update_grad_input_ms;
      acc.acc_grad_ms += res.times.acc_grad_ms;
      checksum = res.grad_checksum;
    }
    const double d = static_cast<double>(o.iters);
    table.add_row({fftconv::method_name(m), fmt_ms(acc.update_output_ms / d),
                   fmt_ms(acc.update_grad_input_ms / d),
                   fmt_ms(acc.acc_grad_ms / d), fmt_ms(acc.total_ms() / d),
                   fmt_val(checksum)});
  }

  emit(o.format == "md" ? table.markdown() : table.csv(), o.out);
  return 0;
}

// ---------------------------------------------------------------------------
// model

struct ModelOpts {
  bool ram_table = false;
  bool crossover = false;
  std::size_t k = 7, f = 96, fp = 256, S = 128;
  double C = 2.5;
  std::string n_values = "8,16,24,32,40,48,56,64";
  bool pow2 = false;
};

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const long long v = std::stoll(tok);
    if (v < 1) throw fftconv::config_error("image sizes must be >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw fftconv::config_error("--n-values: empty list");
  return out;
}

int cmd_model(const ModelOpts& mo, const CommonOpts& o, bool config_given) {
  const bool md = o.format == "md";
  const bool everything = !mo.ram_table && !mo.crossover && !config_given;
  std::string text;

  if (config_given || everything) {
    fftconv::LayerConfig cfg =
        config_given ? config_from(o)
                     : fftconv::LayerConfig{mo.k, 32, mo.f, mo.fp, mo.S};
    fftconv::CostParams p{cfg, mo.C};
    fftconv::Table ops({"op", "direct_ops", "fft_transform", "fft_pointwise",
                        "fft_inverse", "fft_total", "fft/direct"});
    const auto add = [&](const char* name, const fftconv::OpCounts& c) {
      char ratio[32];
      std::snprintf(ratio, sizeof ratio, "%.4f", c.fft_ops() / c.direct_ops);
      ops.add_row({name, fmt_count(c.direct_ops), fmt_count(c.transform_ops),
                   fmt_count(c.pointwise_ops), fmt_count(c.inverse_ops),
                   fmt_count(c.fft_ops()), ratio});
    };
    add("updateOutput", fftconv::ops_forward(p));
    add("updateGradInput", fftconv::ops_grad_input(p));
    add("accGradParameters", fftconv::ops_grad_weight(p));
    text += md ? ops.markdown() : ops.csv();

    char mem[256];
    std::snprintf(mem, sizeof mem,
                  "frequency memory: %llu bytes (%.1f MB); "
                  "as allocated (f32 packing): %llu bytes\n",
                  static_cast<unsigned long long>(fftconv::memory_bytes(cfg)),
                  static_cast<double>(fftconv::memory_bytes(cfg)) / 1e6,
                  static_cast<unsigned long long>(
                      fftconv::packed_memory_bytes(cfg, 4)));
    text += mem;
  }

  if (mo.crossover || everything) {
    if (!text.empty()) text += "\n";
    fftconv::Table t({"n", "direct_ops", "fft_ops"});
    const auto rows = fftconv::crossover_table(
        mo.f, mo.fp, mo.S, mo.k, mo.C, parse_sizes(mo.n_values),
        mo.pow2 ? fftconv::FftSizeMode::pad_pow2
                : fftconv::FftSizeMode::as_given);
    for (const auto& r : rows)
      t.add_row({fmt_sz(r.image), fmt_count(r.direct_ops),
                 fmt_count(r.fft_ops)});
    text += md ? t.markdown() : t.csv();
  }

  if (mo.ram_table || everything) {
    if (!text.empty()) text += "\n";
    fftconv::Table t({"S", "n", "f", "fprime", "bytes", "MB"});
    for (const auto& r : fftconv::ram_table())
      t.add_row({fmt_sz(r.batch), fmt_sz(r.image), fmt_sz(r.in_maps),
                 fmt_sz(r.out_maps), std::to_string(r.bytes),
                 std::to_string(r.megabytes)});
    text += md ? t.markdown() : t.csv();
  }

  emit(text, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFT-accelerated convolution engine: verification, "
               "benchmarks, and cost model"};
  app.require_subcommand(1);

  CommonOpts o;
  std::size_t verify_count = 100;
  std::string preset, spec_file;
  ModelOpts mo;

  const auto add_common = [&](CLI::App* cmd, bool timing) {
    cmd->add_option("--threads", o.threads,
                    "worker threads (0 = FFTCONV_THREADS or hardware)");
    cmd->add_option("--seed", o.seed, "seed for deterministic inputs");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "md"}));
    cmd->add_option("--precision", o.precision, "scalar type")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("--out", o.out, "also write the report to this file");
    if (timing) {
      cmd->add_option("--iters", o.iters, "timed iterations");
      cmd->add_option("--warmup", o.warmup, "untimed warmup iterations");
    }
  };

  auto* verify =
      app.add_subcommand("verify", "compare FFT and direct results over a "
                                   "random config sweep, both precisions");
  verify->add_option("--count", verify_count, "number of random configs");
  add_common(verify, false);

  auto* bench = app.add_subcommand(
      "bench", "time the three layer operations on one config");
  auto* cfg_opt = bench
      ->add_option("--config", o.config, "layer shape k,n,f,fp")
      ->delimiter(',')
      ->expected(4);
  cfg_opt->required();
  bench->add_option("--batch", o.batch, "minibatch size S");
  bench->add_option("--op", o.op, "output|gradinput|gradweight|all");
  bench->add_option("--method", o.method, "direct|fft|both");
  bench->add_flag("--first-layer", o.first_layer,
                  "config is a network's first layer: updateGradInput is "
                  "reported as skipped");
  add_common(bench, true);

  auto* net = app.add_subcommand(
      "net", "composed-network benchmark: per-stage times for a full "
             "training iteration");
  net->add_option("--preset", preset,
                  "built-in network (reference-net, reference-net-small)");
  net->add_option("--spec", spec_file, "network description file");
  auto* net_batch = net->add_option("--batch", o.batch, "minibatch size S");
  net->add_option("--method", o.method, "direct|fft|both");
  add_common(net, true);

  auto* model = app.add_subcommand(
      "model", "analytic operation counts and memory footprints");
  auto* model_cfg = model
      ->add_option("--config", o.config, "layer shape k,n,f,fp")
      ->delimiter(',')
      ->expected(4);
  model->add_option("--batch", o.batch, "minibatch size S");
  model->add_flag("--ram-table", mo.ram_table,
                  "memory for the eight reference configurations");
  model->add_flag("--crossover", mo.crossover,
                  "direct vs FFT op counts across image sizes");
  model->add_option("--k", mo.k, "kernel size for --crossover");
  model->add_option("--f", mo.f, "input maps for --crossover");
  model->add_option("--fp", mo.fp, "output maps for --crossover");
  model->add_option("--S", mo.S, "batch for --crossover");
  model->add_option("--C", mo.C, "hidden FFT constant");
  model->add_option("--n-values", mo.n_values,
                    "comma-separated image sizes for --crossover");
  model->add_flag("--pow2", mo.pow2,
                  "evaluate FFT terms at the padded power-of-2 size");
  add_common(model, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) return cmd_verify(verify_count, o);
    if (app.got_subcommand(bench))
      return o.precision == "f64" ? cmd_bench<double>(o) : cmd_bench<float>(o);
    if (app.got_subcommand(net)) {
      const bool batch_given = net_batch->count() > 0;
      return o.precision == "f64"
                 ? cmd_net<double>(preset, spec_file, o, batch_given)
                 : cmd_net<float>(preset, spec_file, o, batch_given);
    }
    if (app.got_subcommand(model))
      return cmd_model(mo, o, model_cfg->count() > 0);
  } catch (const fftconv::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
