#pragma once

#include <stdexcept>

namespace fftconv {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spatial extent is out of range (bad pad/crop window, kernel larger than
// image, transform length mismatch).
class size_error : public error {
 public:
  using error::error;
};

// Tensor dimensions do not agree between operands (map or batch counts).
class shape_error : public error {
 public:
  using error::error;
};

// Requested transform size cannot be planned (not a power of two).
class plan_error : public error {
 public:
  using error::error;
};

// A workspace is too small for the requested layer.
class capacity_error : public error {
 public:
  using error::error;
};

// Invalid layer or network configuration.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace fftconv
