#pragma once

#include <complex>
#include <span>

namespace q4nls::detail {

enum class FftDirection { forward, inverse };

/// In-place unitary N-D transform of an n^N row-major array.
/// Forward uses e^{-i x.xi}. Safe to call from several threads.
void fft_inplace(std::span<std::complex<double>> data, int dim, int n, FftDirection dir);

}  // namespace q4nls::detail
