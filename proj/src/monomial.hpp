#pragma once

#include <complex>

namespace phg::detail {

/// z^e by repeated multiplication; negative exponents go through the reciprocal.
inline std::complex<double> ipow(std::complex<double> z, int e) {
    std::complex<double> base = e < 0 ? 1.0 / z : z;
    std::complex<double> out = 1.0;
    for (int i = 0, k = e < 0 ? -e : e; i < k; ++i) out *= base;
    return out;
}

}  // namespace phg::detail
