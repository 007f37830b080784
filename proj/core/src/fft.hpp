#pragma once

#include <complex>

namespace gibbslab::detail {

// In-place unnormalized DFT of a side^dim array. sign=+1 synthesizes
// (sum c e^{+ik theta}), sign=-1 analyzes.
void fft_inplace(std::complex<double>* data, int dim, int side, int sign);

}  // namespace gibbslab::detail
