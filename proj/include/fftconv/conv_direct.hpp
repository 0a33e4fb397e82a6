#pragma once

#include <cstddef>

#include "fftconv/errors.hpp"
#include "fftconv/parallel.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

namespace detail {

template <typename T>
void require_square(const Tensor4<T>& t, const char* what) {
  if (t.rows() != t.cols()) throw size_error(std::string(what) + ": planes must be square");
}

}  // namespace detail

// y[b,o,i,j] = sum_f sum_{u,v} x[b,f,i+u,j+v] * w[o,f,u,v]
// Valid cross-correlation, output planes shrink to n-k+1. This is the
// plain quintuple loop used as the oracle and the "direct" baseline; no
// im2col or other rearrangement on purpose.
template <typename T>
Tensor4<T> forward_direct(const Tensor4<T>& x, const Weights4<T>& w,
                          unsigned threads = 1) {
  detail::require_square(x, "forward_direct");
  if (w.in_maps() != x.maps())
    throw shape_error("forward_direct: weight in_maps != input maps");
  const std::size_t n = x.rows(), k = w.kernel();
  if (k > n) throw size_error("forward_direct: kernel larger than image");
  const std::size_t no = n - k + 1;
  const std::size_t S = x.batch(), fin = x.maps(), fout = w.out_maps();

  Tensor4<T> y(S, fout, no, no);
  parallel_for(S * fout, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t b = idx / fout, o = idx % fout;
      auto out = y.plane(b, o);
      for (std::size_t f = 0; f < fin; ++f) {
        auto in = x.plane(b, f);
        auto ker = w.plane(o, f);
        for (std::size_t i = 0; i < no; ++i)
          for (std::size_t j = 0; j < no; ++j) {
            T acc = out[i * no + j];
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v)
                acc += in[(i + u) * n + j + v] * ker[u * k + v];
            out[i * no + j] = acc;
          }
      }
    }
  });
  return y;
}

// gx[b,f,p,q] = sum_o sum_{u,v} gy[b,o,p-u,q-v] * w[o,f,u,v]
// Full convolution (out-of-range gy terms are zero), grows planes back to
// n = n' + k - 1. Written as a scatter over gy so no boundary tests are
// needed; per output plane the accumulation order is fixed.
template <typename T>
Tensor4<T> grad_input_direct(const Tensor4<T>& gy, const Weights4<T>& w,
                             unsigned threads = 1) {
  detail::require_square(gy, "grad_input_direct");
  if (w.out_maps() != gy.maps())
    throw shape_error("grad_input_direct: weight out_maps != gradient maps");
  const std::size_t no = gy.rows(), k = w.kernel();
  const std::size_t n = no + k - 1;
  const std::size_t S = gy.batch(), fin = w.in_maps(), fout = w.out_maps();

  Tensor4<T> gx(S, fin, n, n);
  parallel_for(S * fin, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t b = idx / fin, f = idx % fin;
      auto out = gx.plane(b, f);
      for (std::size_t o = 0; o < fout; ++o) {
        auto grad = gy.plane(b, o);
        auto ker = w.plane(o, f);
        for (std::size_t i = 0; i < no; ++i)
          for (std::size_t j = 0; j < no; ++j) {
            const T g = grad[i * no + j];
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v)
                out[(i + u) * n + j + v] += g * ker[u * k + v];
          }
      }
    }
  });
  return gx;
}

// gw[o,f,u,v] = sum_b sum_{i,j} gy[b,o,i,j] * x[b,f,i+u,j+v]
// Valid cross-correlation of the input by the output gradient, summed over
// the batch in index order.
template <typename T>
Weights4<T> grad_weight_direct(const Tensor4<T>& gy, const Tensor4<T>& x,
                               unsigned threads = 1) {
  detail::require_square(gy, "grad_weight_direct");
  detail::require_square(x, "grad_weight_direct");
  if (gy.batch() != x.batch())
    throw shape_error("grad_weight_direct: batch mismatch");
  const std::size_t no = gy.rows(), n = x.rows();
  if (no > n) throw size_error("grad_weight_direct: gradient larger than input");
  const std::size_t k = n - no + 1;
  const std::size_t S = x.batch(), fin = x.maps(), fout = gy.maps();

  Weights4<T> gw(fout, fin, k);
  parallel_for(fout * fin, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t o = idx / fin, f = idx % fin;
      auto out = gw.plane(o, f);
      for (std::size_t b = 0; b < S; ++b) {
        auto grad = gy.plane(b, o);
        auto in = x.plane(b, f);
        for (std::size_t u = 0; u < k; ++u)
          for (std::size_t v = 0; v < k; ++v) {
            T acc = out[u * k + v];
            for (std::size_t i = 0; i < no; ++i)
              for (std::size_t j = 0; j < no; ++j)
                acc += grad[i * no + j] * in[(i + u) * n + j + v];
            out[u * k + v] = acc;
          }
      }
    }
  });
  return gw;
}

}  // namespace fftconv
