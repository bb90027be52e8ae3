#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "accs/grid.hpp"

namespace accs::detail {

/// Process-wide FFTW plan cache.
///
/// Plans are created lazily per grid shape with FFTW_ESTIMATE | FFTW_UNALIGNED
/// and executed through the new-array interface, which is safe to call from
/// multiple threads. Plan creation itself is not; cache lookups take a shared
/// lock and creation takes the exclusive lock, so transforms never run
/// concurrently with the planner.
class FftEngine {
public:
    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    /// Unnormalized DFT over the grid (column-major layout). sign is
    /// FFTW_FORWARD (-1) or FFTW_BACKWARD (+1). Plans are out-of-place,
    /// so in and out must be distinct buffers.
    void dft(const GridShape& shape, const std::complex<double>* in,
             std::complex<double>* out, int sign) {
        fftw_plan plan = get_plan(sign == FFTW_FORWARD ? Kind::dft_fwd : Kind::dft_bwd, shape);
        std::shared_lock lock(mutex_);
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    /// Raw FFTW REDFT10 (DCT-II) along every grid axis; caller applies the
    /// orthonormal scaling. in and out must be distinct buffers.
    void dct2_raw(const GridShape& shape, const double* in, double* out) {
        fftw_plan plan = get_plan(Kind::dct2, shape);
        std::shared_lock lock(mutex_);
        fftw_execute_r2r(plan, const_cast<double*>(in), out);
    }

    /// Raw FFTW REDFT01 (DCT-III) along every grid axis.
    void dct3_raw(const GridShape& shape, const double* in, double* out) {
        fftw_plan plan = get_plan(Kind::dct3, shape);
        std::shared_lock lock(mutex_);
        fftw_execute_r2r(plan, const_cast<double*>(in), out);
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    enum class Kind { dft_fwd, dft_bwd, dct2, dct3 };
    using Key = std::tuple<int, int, int>;

    FftEngine() = default;

    ~FftEngine() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get_plan(Kind kind, const GridShape& shape) {
        Key key{static_cast<int>(kind), shape.n1, shape.n2};
        {
            std::shared_lock lock(mutex_);
            auto it = plans_.find(key);
            if (it != plans_.end()) return it->second;
        }
        std::unique_lock lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        fftw_plan plan = create_plan(kind, shape);
        plans_.emplace(key, plan);
        return plan;
    }

    fftw_plan create_plan(Kind kind, const GridShape& shape) {
        const int n = shape.size();
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        // A column-major n1 x n2 buffer is a row-major n2 x n1 buffer, so
        // FFTW sees the dimensions reversed.
        if (kind == Kind::dft_fwd || kind == Kind::dft_bwd) {
            std::vector<std::complex<double>> a(n), b(n);
            auto* pa = reinterpret_cast<fftw_complex*>(a.data());
            auto* pb = reinterpret_cast<fftw_complex*>(b.data());
            const int sign = (kind == Kind::dft_fwd) ? FFTW_FORWARD : FFTW_BACKWARD;
            if (shape.is_1d()) return fftw_plan_dft_1d(shape.n1, pa, pb, sign, flags);
            return fftw_plan_dft_2d(shape.n2, shape.n1, pa, pb, sign, flags);
        }
        std::vector<double> a(n), b(n);
        const fftw_r2r_kind rk = (kind == Kind::dct2) ? FFTW_REDFT10 : FFTW_REDFT01;
        if (shape.is_1d()) return fftw_plan_r2r_1d(shape.n1, a.data(), b.data(), rk, flags);
        return fftw_plan_r2r_2d(shape.n2, shape.n1, a.data(), b.data(), rk, rk, flags);
    }

    std::map<Key, fftw_plan> plans_;
    std::shared_mutex mutex_;
};

} // namespace accs::detail
