#pragma once

#include <complex>

namespace sqglab::detail {

/// Unnormalized 2-D c2c DFT, out-of-place. forward uses e^{-i k.x} (FFTW sign
/// convention); backward uses e^{+i k.x}. Thread-safe; plans are cached per
/// (n, direction) and created with FFTW_ESTIMATE so results are reproducible.
void fft2d(int n, const std::complex<double>* in, std::complex<double>* out, bool forward);

} // namespace sqglab::detail
