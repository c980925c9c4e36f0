#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

#include <fftw3.h>

namespace tentlab {

using cplx = std::complex<double>;

// Thin RAII wrapper over a pair of FFTW plans for one transform shape.
// Executing a plan is thread-safe; creating one is not, so plans live in a
// process-wide cache guarded by a mutex and are created once per shape.
class FftPlan {
public:
    FftPlan(int dim, int points) : dim_(dim), points_(points) {
        size_ = 1;
        for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(points);
        auto* a = fftw_alloc_complex(size_);
        auto* b = fftw_alloc_complex(size_);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        if (dim == 1) {
            fwd_ = fftw_plan_dft_1d(points, a, b, FFTW_FORWARD, flags);
            bwd_ = fftw_plan_dft_1d(points, a, b, FFTW_BACKWARD, flags);
        } else {
            fwd_ = fftw_plan_dft_2d(points, points, a, b, FFTW_FORWARD, flags);
            bwd_ = fftw_plan_dft_2d(points, points, a, b, FFTW_BACKWARD, flags);
        }
        fftw_free(a);
        fftw_free(b);
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    ~FftPlan() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    std::size_t size() const noexcept { return size_; }

    // Unnormalized forward transform, out-of-place (in and out may not alias).
    void forward(std::span<const cplx> in, std::span<cplx> out) const {
        fftw_execute_dft(fwd_, cast(in), reinterpret_cast<fftw_complex*>(out.data()));
    }

    // Inverse transform including the 1/size normalization.
    void inverse(std::span<const cplx> in, std::span<cplx> out) const {
        fftw_execute_dft(bwd_, cast(in), reinterpret_cast<fftw_complex*>(out.data()));
        const double scale = 1.0 / static_cast<double>(size_);
        for (auto& v : out) v *= scale;
    }

private:
    // FFTW preserves the input of out-of-place complex transforms.
    static fftw_complex* cast(std::span<const cplx> in) {
        return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    }

    int dim_;
    int points_;
    std::size_t size_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

inline const FftPlan& fft_plan(int dim, int points) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, points}];
    if (!slot) slot = std::make_unique<FftPlan>(dim, points);
    return *slot;
}

} // namespace tentlab
