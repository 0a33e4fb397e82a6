#include <gtest/gtest.h>

#include <complex>
#include <vector>

#include "fftconv/fft.hpp"
#include "fftconv/rng.hpp"
#include "oracles.hpp"

using cd = std::complex<double>;
using fftconv::FftPlan;
using fftconv::HalfSpectrum;
using fftconv::Tensor4;

namespace {

std::vector<cd> random_signal(std::size_t m, std::uint64_t seed) {
  std::vector<cd> x(m);
  for (std::size_t i = 0; i < m; ++i)
    x[i] = {fftconv::uniform_at(seed, 11, 2 * i),
            fftconv::uniform_at(seed, 11, 2 * i + 1)};
  return x;
}

double max_rel(const std::vector<cd>& got, const std::vector<cd>& ref) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num = std::max(num, std::abs(got[i] - ref[i]));
    den = std::max(den, std::abs(ref[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST(FftPlan, RejectsNonPowerOfTwo) {
  EXPECT_THROW(FftPlan<double>(6), fftconv::plan_error);
  EXPECT_THROW(FftPlan<double>(0), fftconv::plan_error);
  EXPECT_NO_THROW(FftPlan<double>(1));
  EXPECT_NO_THROW(FftPlan<double>(64));
}

TEST(FftPlan, BitReversalIsSelfInverse) {
  FftPlan<double> plan(32);
  auto rev = plan.bit_reversal();
  for (std::size_t i = 0; i < rev.size(); ++i) {
    EXPECT_LT(rev[i], rev.size());
    EXPECT_EQ(rev[rev[i]], i);
  }
}

TEST(FftPlan, SizeOneIsIdentity) {
  FftPlan<double> plan(1);
  std::vector<cd> x{{3.5, -1.0}};
  auto X = fftconv::fft_1d<double>(plan, x);
  EXPECT_EQ(X[0], x[0]);
  auto back = fftconv::ifft_1d<double>(plan, X);
  EXPECT_EQ(back[0], x[0]);
}

TEST(Fft1d, ImpulseHasFlatSpectrum) {
  FftPlan<double> plan(8);
  std::vector<cd> x(8);
  x[0] = 1.0;
  auto X = fftconv::fft_1d<double>(plan, x);
  for (const cd& v : X) {
    EXPECT_NEAR(v.real(), 1.0, 1e-14);
    EXPECT_NEAR(v.imag(), 0.0, 1e-14);
  }
}

TEST(Fft1d, ConstantIsDcOnly) {
  FftPlan<double> plan(16);
  std::vector<cd> x(16, cd{2.5, 0});
  auto X = fftconv::fft_1d<double>(plan, x);
  EXPECT_NEAR(X[0].real(), 16 * 2.5, 1e-12);
  for (std::size_t u = 1; u < 16; ++u) EXPECT_NEAR(std::abs(X[u]), 0.0, 1e-12);
  // and back: a DC-only spectrum inverts to the constant
  auto back = fftconv::ifft_1d<double>(plan, X);
  for (const cd& v : back) EXPECT_NEAR(v.real(), 2.5, 1e-13);
}

TEST(Fft1d, MatchesNaiveDftAcrossSizes) {
  for (std::size_t m : {2, 4, 8, 16, 32, 64}) {
    FftPlan<double> plan(m);
    auto x = random_signal(m, 100 + m);
    auto got = fftconv::fft_1d<double>(plan, x);
    auto ref = oracle::dft_1d(x);
    EXPECT_LT(max_rel(got, ref), 1e-12) << "size " << m;
  }
}

TEST(Fft1d, RoundTripIsIdentity) {
  FftPlan<double> plan(32);
  auto x = random_signal(32, 7);
  auto back = fftconv::ifft_1d<double>(plan, fftconv::fft_1d<double>(plan, x));
  EXPECT_LT(max_rel(back, x), 1e-12);
}

TEST(Fft1d, Linearity) {
  FftPlan<double> plan(16);
  auto x = random_signal(16, 1);
  auto y = random_signal(16, 2);
  const cd a{1.25, -0.5}, b{-2.0, 0.75};
  std::vector<cd> mix(16);
  for (std::size_t i = 0; i < 16; ++i) mix[i] = a * x[i] + b * y[i];
  auto X = fftconv::fft_1d<double>(plan, x);
  auto Y = fftconv::fft_1d<double>(plan, y);
  auto M = fftconv::fft_1d<double>(plan, mix);
  std::vector<cd> expect(16);
  for (std::size_t i = 0; i < 16; ++i) expect[i] = a * X[i] + b * Y[i];
  EXPECT_LT(max_rel(M, expect), 1e-12);
}

TEST(Fft1d, LengthMismatchThrows) {
  FftPlan<double> plan(8);
  std::vector<cd> x(4);
  EXPECT_THROW(fftconv::fft_1d<double>(plan, x), fftconv::size_error);
  EXPECT_THROW(fftconv::ifft_1d<double>(plan, x), fftconv::size_error);
}

TEST(Fft2d, ZeroPlaneGivesZeroSpectrum) {
  FftPlan<float> plan(8);
  Tensor4<float> t(1, 1, 8, 8);
  auto s = fftconv::fft_2d_real_batch(plan, t);
  for (const auto& v : s.data()) EXPECT_EQ(std::abs(v), 0.0f);
}

TEST(Fft2d, ImpulseAtOriginIsAllOnes) {
  FftPlan<double> plan(8);
  Tensor4<double> t(1, 1, 8, 8);
  t.at(0, 0, 0, 0) = 1.0;
  auto s = fftconv::fft_2d_real_batch(plan, t);
  for (std::size_t u = 0; u < 8; ++u)
    for (std::size_t v = 0; v < 8; ++v) {
      EXPECT_NEAR(s.full_bin(0, 0, u, v).real(), 1.0, 1e-14);
      EXPECT_NEAR(s.full_bin(0, 0, u, v).imag(), 0.0, 1e-14);
    }
}

TEST(Fft2d, AllOnesSpectrumInvertsToImpulse) {
  FftPlan<double> plan(8);
  HalfSpectrum<double> s(1, 1, 8);
  for (auto& v : s.data()) v = 1.0;
  auto t = fftconv::ifft_2d_real_batch(plan, s);
  EXPECT_NEAR(t.at(0, 0, 0, 0), 1.0, 1e-13);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      if (i || j) EXPECT_NEAR(t.at(0, 0, i, j), 0.0, 1e-13);
}

TEST(Fft2d, MatchesNaive2dDft) {
  const std::size_t m = 8;
  FftPlan<double> plan(m);
  Tensor4<double> t(1, 1, m, m);
  fftconv::fill_uniform(t.data(), 42, fftconv::TensorRole::input);
  auto s = fftconv::fft_2d_real_batch(plan, t);
  auto ref = oracle::dft_2d(t.plane(0, 0), m);
  double num = 0, den = 0;
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = 0; v < m; ++v) {
      num = std::max(num, std::abs(s.full_bin(0, 0, u, v) - ref[u * m + v]));
      den = std::max(den, std::abs(ref[u * m + v]));
    }
  EXPECT_LT(num / den, 1e-12);
}

TEST(Fft2d, HermitianSymmetryOfUnpackedBins) {
  const std::size_t m = 16;
  FftPlan<double> plan(m);
  Tensor4<double> t(1, 2, m, m);
  fftconv::fill_uniform(t.data(), 5, fftconv::TensorRole::input);
  auto s = fftconv::fft_2d_real_batch(plan, t);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t v = 0; v < m; ++v) {
        const cd a = s.full_bin(0, f, u, v);
        const cd b = std::conj(s.full_bin(0, f, (m - u) % m, (m - v) % m));
        EXPECT_NEAR(std::abs(a - b), 0.0, 1e-9);
      }
}

TEST(Fft2d, RoundTripOnRandomTensor) {
  const std::size_t m = 16;
  FftPlan<double> plan(m);
  Tensor4<double> t(2, 3, m, m);
  fftconv::fill_uniform(t.data(), 99, fftconv::TensorRole::input);
  auto back =
      fftconv::ifft_2d_real_batch(plan, fftconv::fft_2d_real_batch(plan, t));
  EXPECT_EQ(back.batch(), t.batch());
  EXPECT_EQ(back.maps(), t.maps());
  EXPECT_LT(fftconv::max_rel_error<double>(back.data(), t.data()), 1e-12);
}

TEST(Fft2d, RejectsUnpaddedInput) {
  FftPlan<double> plan(8);
  Tensor4<double> t(1, 1, 6, 6);
  EXPECT_THROW(fftconv::fft_2d_real_batch(plan, t), fftconv::size_error);
}

TEST(Fft, Parseval1dAnd2d) {
  FftPlan<double> plan(32);
  auto x = random_signal(32, 3);
  auto X = fftconv::fft_1d<double>(plan, x);
  double e_time = 0, e_freq = 0;
  for (const cd& v : x) e_time += std::norm(v);
  for (const cd& v : X) e_freq += std::norm(v);
  EXPECT_NEAR(e_freq / 32.0, e_time, 1e-10 * e_time);

  const std::size_t m = 16;
  FftPlan<double> plan2(m);
  Tensor4<double> t(1, 1, m, m);
  fftconv::fill_uniform(t.data(), 17, fftconv::TensorRole::input);
  auto s = fftconv::fft_2d_real_batch(plan2, t);
  double p_time = 0, p_freq = 0;
  for (double v : t.plane(0, 0)) p_time += v * v;
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = 0; v < m; ++v) p_freq += std::norm(s.full_bin(0, 0, u, v));
  EXPECT_NEAR(p_freq / (m * m), p_time, 1e-10 * p_time);
}

TEST(HalfSpectrum, PackedColumnCount) {
  HalfSpectrum<double> s(2, 3, 16);
  EXPECT_EQ(s.packed_cols(), 9u);
  EXPECT_EQ(s.plane_size(), 16u * 9);
  EXPECT_EQ(s.data().size(), 2u * 3 * 16 * 9);
}
