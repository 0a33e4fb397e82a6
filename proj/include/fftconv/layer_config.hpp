#pragma once

#include <cstddef>
#include <string>

#include "fftconv/errors.hpp"

namespace fftconv {

// Smallest power of two >= n.
inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// One convolution layer shape: k x k kernels, n x n input planes, f input
// maps, f' output maps, batch of S images. Valid convolution shrinks the
// plane to n' = n - k + 1.
struct LayerConfig {
  std::size_t kernel = 0;    // k
  std::size_t image = 0;     // n
  std::size_t in_maps = 0;   // f
  std::size_t out_maps = 0;  // f'
  std::size_t batch = 0;     // S

  std::size_t output_size() const { return image - kernel + 1; }  // n'
  std::size_t fft_size() const { return next_pow2(image); }       // m

  void validate() const {
    if (kernel == 0 || image == 0 || in_maps == 0 || out_maps == 0 ||
        batch == 0)
      throw config_error("layer config: all parameters must be >= 1");
    if (kernel > image)
      throw config_error("layer config: kernel " + std::to_string(kernel) +
                         " exceeds image " + std::to_string(image));
  }
};

}  // namespace fftconv
