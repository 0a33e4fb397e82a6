#include <gtest/gtest.h>

#include "fftconv/tensor.hpp"

using fftconv::Tensor4;
using fftconv::Weights4;

TEST(Tensor4, IndexingIsRowMajorBatchOutermost) {
  Tensor4<double> t(2, 3, 4, 5);
  EXPECT_EQ(t.size(), 2u * 3 * 4 * 5);
  t.at(1, 2, 3, 4) = 7.0;
  EXPECT_EQ(t.data()[((1 * 3 + 2) * 4 + 3) * 5 + 4], 7.0);
  auto plane = t.plane(1, 2);
  EXPECT_EQ(plane.size(), 20u);
  EXPECT_EQ(plane[3 * 5 + 4], 7.0);
}

TEST(Tensor4, ZeroInitialized) {
  Tensor4<float> t(1, 1, 2, 2);
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Tensor4, RejectsZeroDimensions) {
  EXPECT_THROW(Tensor4<double>(0, 1, 1, 1), fftconv::size_error);
  EXPECT_THROW(Tensor4<double>(1, 1, 0, 1), fftconv::size_error);
  EXPECT_THROW(Weights4<double>(1, 0, 1), fftconv::size_error);
}

TEST(PadTo, ZeroExtendsTopLeft) {
  Tensor4<double> t(1, 1, 2, 2);
  t.at(0, 0, 0, 0) = 1;
  t.at(0, 0, 0, 1) = 2;
  t.at(0, 0, 1, 0) = 3;
  t.at(0, 0, 1, 1) = 4;
  auto p = fftconv::pad_to(t, 4, 4);
  EXPECT_EQ(p.rows(), 4u);
  EXPECT_EQ(p.at(0, 0, 0, 0), 1);
  EXPECT_EQ(p.at(0, 0, 0, 1), 2);
  EXPECT_EQ(p.at(0, 0, 1, 0), 3);
  EXPECT_EQ(p.at(0, 0, 1, 1), 4);
  EXPECT_EQ(p.at(0, 0, 0, 2), 0);
  EXPECT_EQ(p.at(0, 0, 2, 0), 0);
  EXPECT_EQ(p.at(0, 0, 3, 3), 0);
}

TEST(PadTo, RejectsShrinking) {
  Tensor4<double> t(1, 1, 3, 3);
  EXPECT_THROW(fftconv::pad_to(t, 2, 4), fftconv::size_error);
}

TEST(Crop, ExtractsWindow) {
  Tensor4<double> t(1, 1, 3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      t.at(0, 0, i, j) = static_cast<double>(3 * i + j);
  auto c = fftconv::crop(t, 1, 1, 2, 2);
  EXPECT_EQ(c.at(0, 0, 0, 0), 4);
  EXPECT_EQ(c.at(0, 0, 1, 1), 8);
  EXPECT_THROW(fftconv::crop(t, 2, 2, 2, 2), fftconv::size_error);
}

TEST(PadCrop, RoundTripIsIdentity) {
  Tensor4<double> t(2, 2, 3, 3);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.data()[i] = static_cast<double>(i) * 0.25 - 3.0;
  auto back = fftconv::crop(fftconv::pad_to(t, 8, 8), 0, 0, 3, 3);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_EQ(back.data()[i], t.data()[i]);
}

TEST(FlipSpatial, Rotates180) {
  Weights4<double> w(1, 1, 2);
  w.at(0, 0, 0, 0) = 1;
  w.at(0, 0, 0, 1) = 2;
  w.at(0, 0, 1, 0) = 3;
  w.at(0, 0, 1, 1) = 4;
  auto f = fftconv::flip_spatial(w);
  EXPECT_EQ(f.at(0, 0, 0, 0), 4);
  EXPECT_EQ(f.at(0, 0, 0, 1), 3);
  EXPECT_EQ(f.at(0, 0, 1, 0), 2);
  EXPECT_EQ(f.at(0, 0, 1, 1), 1);
  // flipping twice restores the kernel
  auto ff = fftconv::flip_spatial(f);
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_EQ(ff.data()[i], w.data()[i]);
}

TEST(Norms, MaxAbsAndRelError) {
  std::vector<double> a{1.0, -5.0, 2.0};
  std::vector<double> b{1.0, -5.0, 2.5};
  EXPECT_EQ(fftconv::max_abs<double>(a), 5.0);
  EXPECT_EQ(fftconv::max_abs_diff<double>(a, b), 0.5);
  EXPECT_DOUBLE_EQ(fftconv::max_rel_error<double>(b, a), 0.1);
}
