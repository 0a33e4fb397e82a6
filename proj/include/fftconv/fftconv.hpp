#pragma once

// Umbrella header for the whole library.

#include "fftconv/bench.hpp"
#include "fftconv/conv_direct.hpp"
#include "fftconv/conv_fft.hpp"
#include "fftconv/cost_model.hpp"
#include "fftconv/errors.hpp"
#include "fftconv/fft.hpp"
#include "fftconv/layer_config.hpp"
#include "fftconv/layers.hpp"
#include "fftconv/parallel.hpp"
#include "fftconv/rng.hpp"
#include "fftconv/table.hpp"
#include "fftconv/tensor.hpp"
