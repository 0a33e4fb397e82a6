#pragma once

#include <cstdint>
#include <span>

namespace fftconv {

// Role tag separating the value streams of the tensors in one benchmark run,
// so that direct and FFT paths consume byte-identical inputs for a given
// seed regardless of generation order or thread count.
enum class TensorRole : std::uint64_t {
  input = 1,
  weights = 2,
  grad_output = 3,
  fc_weights = 4,
  fc_bias = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: element `index` of the (seed, role) stream,
// uniform in [-1, 1). Pure function of its arguments.
inline double uniform_at(std::uint64_t seed, std::uint64_t role,
                         std::uint64_t index) {
  const std::uint64_t key = detail::splitmix64(seed ^ detail::splitmix64(role));
  const std::uint64_t h = detail::splitmix64(key ^ index);
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

// stream distinguishes multiple tensors of the same role, e.g. the weights
// of each layer in a stack.
template <typename T>
void fill_uniform(std::span<T> out, std::uint64_t seed, TensorRole role,
                  std::uint64_t stream = 0) {
  const std::uint64_t r = static_cast<std::uint64_t>(role) | (stream << 8);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>(uniform_at(seed, r, i));
}

}  // namespace fftconv
