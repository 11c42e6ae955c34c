#pragma once

#include <complex>
#include <vector>

namespace volcast {

// In-place iterative radix-2 FFT. Size must be a power of two (throws
// otherwise). inverse=true applies the conjugate transform including the
// 1/n scale, so fft(fft(x), inverse) round-trips.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse = false);

// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

}  // namespace volcast
