#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace sqglab::detail {

namespace {

struct PlanCache {
    std::mutex mtx;
    std::map<std::pair<int, int>, fftw_plan> plans;

    fftw_plan get(int n, bool forward) {
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_pair(n, forward ? -1 : 1);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        // Out-of-place plan; FFTW_UNALIGNED lets it execute on arbitrary
        // caller buffers via fftw_execute_dft.
        fftw_complex* ti = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
        fftw_complex* to = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
        fftw_plan p = fftw_plan_dft_2d(n, n, ti, to,
                                       forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(ti);
        fftw_free(to);
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

} // namespace

void fft2d(int n, const std::complex<double>* in, std::complex<double>* out, bool forward) {
    fftw_plan p = cache().get(n, forward);
    fftw_execute_dft(p,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace sqglab::detail
