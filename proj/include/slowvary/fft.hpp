#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "slowvary/error.hpp"

namespace slowvary {

namespace detail {
// FFTW's planner is not thread-safe.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace detail

/// In-place multi-dimensional complex DFT applied to `howmany` interleaved
/// fields: element (point p, field c) lives at data[p * howmany + c], points
/// row-major with the last dimension fastest. Unnormalised in both directions.
class InterleavedFft {
public:
    InterleavedFft(const std::vector<int>& sizes, int howmany, std::complex<double>* data)
    {
        if (sizes.empty() || howmany < 1)
            fail(ErrorKind::InvalidArgument, "FFT needs at least one dimension and one field");
        std::lock_guard lock(detail::fftw_planner_mutex());
        auto* buf = reinterpret_cast<fftw_complex*>(data);
        const int rank = static_cast<int>(sizes.size());
        forward_ = fftw_plan_many_dft(rank, sizes.data(), howmany, buf, nullptr, howmany, 1, buf, nullptr, howmany, 1,
                                      FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_many_dft(rank, sizes.data(), howmany, buf, nullptr, howmany, 1, buf, nullptr, howmany, 1,
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!forward_ || !backward_)
            fail(ErrorKind::InvalidArgument, "FFTW could not create a plan");
    }

    InterleavedFft(const InterleavedFft&) = delete;
    InterleavedFft& operator=(const InterleavedFft&) = delete;

    ~InterleavedFft()
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (forward_)
            fftw_destroy_plan(forward_);
        if (backward_)
            fftw_destroy_plan(backward_);
    }

    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace slowvary
