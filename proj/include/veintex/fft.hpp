#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "veintex/error.hpp"

namespace veintex::fft {

using cplx = std::complex<double>;

namespace detail {

/// FFTW planning is not thread-safe; execution is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// Row-major 2-D DFT in place, unnormalized forward; the inverse is scaled by
/// 1/(width*height).
inline void transform2d(std::vector<cplx>& grid, int width, int height, bool inverse) {
    if (width <= 0 || height <= 0 || grid.size() != static_cast<std::size_t>(width) * height) {
        fail(ErrorKind::parameter, "fft grid size mismatch");
    }
    auto* data = reinterpret_cast<fftw_complex*>(grid.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan = fftw_plan_dft_2d(height, width, data, data, inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (!plan) fail(ErrorKind::parameter, "fftw could not plan the transform");
    fftw_execute(plan);
    {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        const double scale = 1.0 / (static_cast<double>(width) * height);
        for (auto& v : grid) v *= scale;
    }
}

} // namespace veintex::fft
