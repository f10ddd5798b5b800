#pragma once

#include <complex>
#include <vector>

namespace kfhd {

using cplx = std::complex<double>;

// In-place multidimensional c2c transform on a row-major array.
// Forward uses exp(-i k x); inverse is normalized by the total size.
void fft_forward(std::vector<cplx>& data, const std::vector<int>& dims);
void fft_inverse(std::vector<cplx>& data, const std::vector<int>& dims);

// Angular wavenumber of index m on an axis with n points and spacing h.
// The Nyquist index maps to -pi/h.
inline double wavenumber(int m, int n, double h) {
    const int s = (m < n / 2) ? m : m - n;
    return 2.0 * 3.14159265358979323846 * s / (n * h);
}

inline int signed_index(int m, int n) { return (m < n / 2) ? m : m - n; }

}  // namespace kfhd
