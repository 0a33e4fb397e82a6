// Acceptance harness. Runs the eight acceptance checks and prints one
// PASS/FAIL line per criterion; --only N runs a single one. Exit code is 0
// iff every gating criterion that ran passed (criterion 8 reports only).

#include <array>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "fftconv/fftconv.hpp"
#include "oracles.hpp"

namespace {

struct Outcome {
  bool pass = false;
  bool soft = false;  // reported, never gates the exit code
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-30});
}

// --------------------------------------------------------------------------
// 1. FFT results match the direct path over a random config sweep.

Outcome criterion1() {
  const unsigned threads = fftconv::resolve_threads(0);
  const auto cfgs = fftconv::random_verify_configs(100, 2024);
  const auto f32 = fftconv::verify_sweep<float>(cfgs, threads, 2024);
  const auto f64 = fftconv::verify_sweep<double>(cfgs, threads, 2024);
  const bool ok =
      f32.within(1e-4, 1e-4, 1e-3) && f64.within(1e-10, 1e-10, 1e-10);
  return {ok, false,
          fmt("100 configs; f32 max_rel_err %.2e/%.2e/%.2e vs 1e-4/1e-4/1e-3, "
              "f64 %.2e/%.2e/%.2e vs 1e-10",
              f32.max_err_forward, f32.max_err_grad_input,
              f32.max_err_grad_weight, f64.max_err_forward,
              f64.max_err_grad_input, f64.max_err_grad_weight)};
}

// --------------------------------------------------------------------------
// 2. The CLI's --ram-table rows round to the eight reference MB values.

bool run_command(const std::string& cmd, std::string& out) {
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return false;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  return pclose(p) == 0;
}

Outcome criterion2() {
  static constexpr std::uint64_t want[8] = {76,  294, 784, 1159,
                                            151, 588, 214, 830};
  std::vector<std::uint64_t> got;
  std::string source;

  if (const char* cli = std::getenv("FFTCONV_CLI"); cli && *cli) {
    const std::string cmd =
        std::string("\"") + cli + "\" model --ram-table --format csv";
    std::string out;
    if (!run_command(cmd, out))
      return {false, false, "could not run " + cmd};
    source = "CLI";
    std::size_t pos = 0;
    bool header = true;
    while (pos < out.size()) {
      const std::size_t eol = out.find('\n', pos);
      const std::string line =
          out.substr(pos, eol == std::string::npos ? eol : eol - pos);
      pos = eol == std::string::npos ? out.size() : eol + 1;
      if (line.empty()) continue;
      if (header) {  // S,n,f,fprime,bytes,MB
        header = false;
        continue;
      }
      const std::size_t comma = line.rfind(',');
      if (comma == std::string::npos)
        return {false, false, "unparseable row: " + line};
      got.push_back(std::strtoull(line.c_str() + comma + 1, nullptr, 10));
    }
  } else {
    source = "library (FFTCONV_CLI not set)";
    for (const auto& r : fftconv::ram_table()) got.push_back(r.megabytes);
  }

  if (got.size() != 8)
    return {false, false,
            fmt("expected 8 rows from %s, got %zu", source.c_str(),
                got.size())};
  std::string mism;
  for (std::size_t i = 0; i < 8; ++i)
    if (got[i] != want[i])
      mism += fmt("%srow %zu got %llu want %llu", mism.empty() ? "" : "; ",
                  i + 1, static_cast<unsigned long long>(got[i]),
                  static_cast<unsigned long long>(want[i]));
  if (mism.empty()) return {true, false, "all 8 rows match via " + source};
  return {false, false, "via " + source + ": " + mism};
}

// --------------------------------------------------------------------------
// 3. Modelled FFT forward cost sits below direct for the large config.

Outcome criterion3() {
  double worst_ratio = 0;
  for (double C : {1.0, 2.5, 5.0})
    for (std::size_t n : {16u, 32u, 64u}) {
      fftconv::CostParams p{{7, n, 96, 256, 128}, C};
      const auto c = fftconv::ops_forward(p);
      const double ratio = c.fft_ops() / c.direct_ops;
      worst_ratio = std::max(worst_ratio, ratio);
      if (!(c.fft_ops() < c.direct_ops))
        return {false, false,
                fmt("fft_ops %.3e >= direct_ops %.3e at n=%zu C=%.1f",
                    c.fft_ops(), c.direct_ops, n, C)};
    }
  return {true, false,
          fmt("fft below direct for n in {16,32,64}, C in {1,2.5,5}; worst "
              "fft/direct ratio %.4f",
              worst_ratio)};
}

// --------------------------------------------------------------------------
// 4. Adjoint identities among the three direct operations.

Outcome criterion4() {
  const auto cfgs = fftconv::random_verify_configs(100, 77);
  double worst = 0;
  for (const auto& cfg : cfgs) {
    const std::size_t no = cfg.output_size();
    fftconv::Tensor4<double> x(cfg.batch, cfg.in_maps, cfg.image, cfg.image);
    fftconv::Weights4<double> w(cfg.out_maps, cfg.in_maps, cfg.kernel);
    fftconv::Tensor4<double> gy(cfg.batch, cfg.out_maps, no, no);
    fftconv::fill_uniform(x.data(), 77, fftconv::TensorRole::input);
    fftconv::fill_uniform(w.data(), 77, fftconv::TensorRole::weights);
    fftconv::fill_uniform(gy.data(), 77, fftconv::TensorRole::grad_output);

    const auto y = fftconv::forward_direct(x, w);
    const auto gx = fftconv::grad_input_direct(gy, w);
    const auto gw = fftconv::grad_weight_direct(gy, x);
    const double a = oracle::dot<double>(y.data(), gy.data());
    const double b = oracle::dot<double>(x.data(), gx.data());
    const double c = oracle::dot<double>(w.data(), gw.data());
    worst = std::max({worst, rel_gap(a, b), rel_gap(a, c)});
  }
  return {worst <= 1e-10, false,
          fmt("100 shapes; worst inner-product mismatch %.2e vs 1e-10",
              worst)};
}

// --------------------------------------------------------------------------
// 5. Finite differences match the weight gradients of a small net.

Outcome criterion5() {
  const auto spec = fftconv::parse_network_string(
      "conv 3 8 2 4\nrelu\npool\nconv 2 3 4 3\nrelu\nfc 5\n");
  const auto params = fftconv::init_params<double>(spec, 21);
  const auto batch = fftconv::make_batch<double>(spec, 2, 22);
  const double eps = 1e-6;
  double worst = 0;

  for (fftconv::Engine eng : {fftconv::Engine::direct, fftconv::Engine::fft}) {
    const auto loss = [&](const fftconv::NetworkParams<double>& p) {
      return fftconv::run_iteration(spec, p, batch, eng).loss;
    };
    const auto res = fftconv::run_iteration(spec, params, batch, eng);
    const auto check = [&](double got, double* slot,
                           fftconv::NetworkParams<double>& p) {
      // p is a fresh copy; slot points into it
      *slot += eps;
      const double lp = loss(p);
      *slot -= 2 * eps;
      const double lm = loss(p);
      const double fd = (lp - lm) / (2 * eps);
      worst = std::max(worst, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
    };
    for (std::size_t l = 0; l < params.conv.size(); ++l) {
      const std::size_t sz = params.conv[l].size();
      for (std::size_t idx : {std::size_t{0}, sz / 2, sz - 1}) {
        fftconv::NetworkParams<double> p = params;
        check(res.conv_weight_grads[l].data()[idx], &p.conv[l].data()[idx], p);
      }
    }
    for (std::size_t idx :
         {std::size_t{0}, params.fc.weights.size() - 1}) {
      fftconv::NetworkParams<double> p = params;
      check(res.fc_weight_grad[idx], &p.fc.weights[idx], p);
    }
    {
      fftconv::NetworkParams<double> p = params;
      check(res.fc_bias_grad[0], &p.fc.bias[0], p);
    }
  }
  return {worst < 1e-5, false,
          fmt("two-conv net, both engines; worst rel FD mismatch %.2e vs "
              "1e-5",
              worst)};
}

// --------------------------------------------------------------------------
// 6. FFT-path operation counters do not depend on the kernel size.

Outcome criterion6() {
  const std::size_t n = 16, S = 2, f = 3, fp = 4;
  std::array<fftconv::OpCounters, 3> first{};
  bool have = false;
  for (std::size_t k : {3u, 5u, 7u, 11u}) {
    fftconv::ConvWorkspace<double> ws({{k, n, f, fp, S}});
    fftconv::Tensor4<double> x(S, f, n, n);
    fftconv::Weights4<double> w(fp, f, k);
    fftconv::Tensor4<double> gy(S, fp, n - k + 1, n - k + 1);
    fftconv::fill_uniform(x.data(), 5, fftconv::TensorRole::input);
    fftconv::fill_uniform(w.data(), 5, fftconv::TensorRole::weights);
    fftconv::fill_uniform(gy.data(), 5, fftconv::TensorRole::grad_output);

    std::array<fftconv::OpCounters, 3> now;
    (void)ws.forward(x, w);
    now[0] = ws.counters();
    ws.reset_counters();
    (void)ws.grad_input(gy, w);
    now[1] = ws.counters();
    ws.reset_counters();
    (void)ws.grad_weight(gy, x);
    now[2] = ws.counters();

    if (have && now != first)
      return {false, false, fmt("counters changed at k=%zu", k)};
    first = now;
    have = true;
  }
  return {true, false,
          fmt("counters identical for k in {3,5,7,11} at n=%zu S=%zu f=%zu "
              "f'=%zu (forward: %llu/%llu xforms, %llu macs)",
              n, S, f, fp,
              static_cast<unsigned long long>(first[0].forward_transforms),
              static_cast<unsigned long long>(first[0].inverse_transforms),
              static_cast<unsigned long long>(first[0].complex_macs))};
}

// --------------------------------------------------------------------------
// 7. Transforms agree with the naive DFT; Parseval and linearity hold.

Outcome criterion7() {
  double worst_dft = 0, worst_other = 0;

  for (std::size_t m : {2u, 4u, 8u, 16u, 32u, 64u}) {
    fftconv::FftPlan<double> plan1(m);
    std::vector<std::complex<double>> x(m);
    for (std::size_t i = 0; i < m; ++i)
      x[i] = {fftconv::uniform_at(3, 9, 2 * i),
              fftconv::uniform_at(3, 9, 2 * i + 1)};
    const auto got =
        fftconv::fft_1d(plan1, std::span<const std::complex<double>>(x));
    const auto ref = oracle::dft_1d(x);
    double ref_mag = 1e-30, diff = 0;
    for (std::size_t i = 0; i < m; ++i) {
      ref_mag = std::max(ref_mag, std::abs(ref[i]));
      diff = std::max(diff, std::abs(got[i] - ref[i]));
    }
    worst_dft = std::max(worst_dft, diff / ref_mag);

    // Parseval in 1-D: sum |x|^2 == (1/m) sum |X|^2
    double tx = 0, tX = 0;
    for (std::size_t i = 0; i < m; ++i) {
      tx += std::norm(x[i]);
      tX += std::norm(got[i]);
    }
    worst_other = std::max(worst_other, rel_gap(tx, tX / double(m)));

    // linearity with complex coefficients
    std::vector<std::complex<double>> y(m), mix(m);
    for (std::size_t i = 0; i < m; ++i)
      y[i] = {fftconv::uniform_at(4, 9, 2 * i),
              fftconv::uniform_at(4, 9, 2 * i + 1)};
    const std::complex<double> a{0.7, -0.3}, b{-1.1, 0.25};
    for (std::size_t i = 0; i < m; ++i) mix[i] = a * x[i] + b * y[i];
    const auto fm =
        fftconv::fft_1d(plan1, std::span<const std::complex<double>>(mix));
    const auto fy =
        fftconv::fft_1d(plan1, std::span<const std::complex<double>>(y));
    double lin_diff = 0, lin_mag = 1e-30;
    for (std::size_t i = 0; i < m; ++i) {
      const std::complex<double> expect = a * got[i] + b * fy[i];
      lin_diff = std::max(lin_diff, std::abs(fm[i] - expect));
      lin_mag = std::max(lin_mag, std::abs(expect));
    }
    worst_other = std::max(worst_other, lin_diff / lin_mag);
  }

  for (std::size_t m : {2u, 4u, 8u, 16u, 32u, 64u}) {
    fftconv::Tensor4<double> t(1, 1, m, m);
    fftconv::fill_uniform(t.data(), 6, fftconv::TensorRole::input);
    const std::vector<double> plane(t.data().begin(), t.data().end());
    fftconv::FftPlan<double> plan(m);
    const auto spec = fftconv::fft_2d_real_batch(plan, t);
    const auto ref = oracle::dft_2d(std::span<const double>(plane), m);
    double ref_mag = 1e-30, diff = 0, tX = 0;
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t v = 0; v < m; ++v) {
        const auto got = spec.full_bin(0, 0, u, v);
        const auto want = ref[u * m + v];
        ref_mag = std::max(ref_mag, std::abs(want));
        diff = std::max(diff, std::abs(got - want));
        tX += std::norm(got);
      }
    worst_dft = std::max(worst_dft, diff / ref_mag);
    double tx = 0;
    for (double v : plane) tx += v * v;
    worst_other = std::max(worst_other, rel_gap(tx, tX / double(m * m)));
  }

  const bool ok = worst_dft <= 1e-12 && worst_other <= 1e-10;
  return {ok, false,
          fmt("sizes 2..64; worst DFT mismatch %.2e vs 1e-12, worst "
              "Parseval/linearity gap %.2e vs 1e-10",
              worst_dft, worst_other)};
}

// --------------------------------------------------------------------------
// 8. Wall-clock comparison at a desk-scale config. Reported, not gated:
// absolute speedups depend entirely on the machine.

Outcome criterion8() {
  const fftconv::LayerConfig cfg{7, 32, 96, 256, 8};
  double direct_total = 0, fft_total = 0;
  for (fftconv::BenchOp op : {fftconv::BenchOp::output,
                              fftconv::BenchOp::gradinput,
                              fftconv::BenchOp::gradweight}) {
    direct_total += fftconv::run_op_bench<float>(cfg, op,
                                                 fftconv::Method::direct, 1, 0,
                                                 4, 99)
                        .stats.mean_ms;
    fft_total += fftconv::run_op_bench<float>(cfg, op, fftconv::Method::fft, 1,
                                              0, 4, 99)
                     .stats.mean_ms;
  }
  return {fft_total < direct_total, true,
          fmt("config (7,32,96,256) S=8 threads=4: fft %.1f ms vs direct "
              "%.1f ms over the three ops",
              fft_total, direct_total)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 2;
    }
  }

  struct Entry {
    int id;
    Outcome (*fn)();
  };
  const Entry entries[] = {{1, criterion1}, {2, criterion2}, {3, criterion3},
                           {4, criterion4}, {5, criterion5}, {6, criterion6},
                           {7, criterion7}, {8, criterion8}};
  bool all_ok = true;
  bool ran_any = false;
  for (const Entry& e : entries) {
    if (only && e.id != only) continue;
    ran_any = true;
    Outcome o;
    try {
      o = e.fn();
    } catch (const std::exception& ex) {
      o = {false, false, std::string("exception: ") + ex.what()};
    }
    std::printf("criterion %d: %s%s: %s\n", e.id, o.pass ? "PASS" : "FAIL",
                o.soft ? " (soft, not gated)" : "", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !o.soft) all_ok = false;
  }
  if (!ran_any) {
    std::fprintf(stderr, "no such criterion: %d\n", only);
    return 2;
  }
  return all_ok ? 0 : 1;
}
