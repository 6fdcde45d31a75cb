#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ssn4 {

// Max-shifted logsumexp over n contiguous doubles.
inline double stable_logsumexp(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

// Max-shifted softmax; out may alias x.
inline void stable_softmax(const double* x, double* out, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(x[i] - m);
        s += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= s;
}

}  // namespace ssn4
