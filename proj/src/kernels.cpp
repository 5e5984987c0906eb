#include "prl/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace prl::kernels {

#if PRL_HAVE_AVX2_TU
const Ops& avx2_ops(); // defined in kernels_avx2.cpp
#endif

bool cpu_supports_avx2() {
#if PRL_HAVE_AVX2_TU && (defined(__x86_64__) || defined(_M_X64))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* detect() {
#if PRL_HAVE_AVX2_TU
    if (cpu_supports_avx2()) return &avx2_ops();
#endif
    return &scalar_ops();
}

} // namespace

const Ops& ops() {
    const Ops* p = g_active.load(std::memory_order_acquire);
    if (!p) {
        p = detect();
        g_active.store(p, std::memory_order_release);
    }
    return *p;
}

void force_backend(Backend b) {
    switch (b) {
    case Backend::auto_detect:
        g_active.store(detect(), std::memory_order_release);
        return;
    case Backend::scalar:
        g_active.store(&scalar_ops(), std::memory_order_release);
        return;
    case Backend::avx2:
#if PRL_HAVE_AVX2_TU
        if (cpu_supports_avx2()) {
            g_active.store(&avx2_ops(), std::memory_order_release);
            return;
        }
#endif
        throw std::runtime_error("kernels: AVX2 backend unavailable on this CPU/build");
    }
    throw std::runtime_error("kernels: unknown backend");
}

const char* active_backend_name() { return ops().name; }

} // namespace prl::kernels
