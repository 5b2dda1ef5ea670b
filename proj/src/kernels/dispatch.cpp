#include "mgdual/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace mgdual::kernels {

bool avx2_available() {
#if defined(MGDUAL_X86) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& table(Backend b) {
    switch (b) {
        case Backend::scalar:
            return detail::scalar_table;
        case Backend::avx2:
#ifdef MGDUAL_X86
            if (avx2_available()) return detail::avx2_table;
#endif
            throw std::runtime_error("avx2 kernels not available on this CPU/build");
        case Backend::automatic:
        default:
#ifdef MGDUAL_X86
            if (avx2_available()) return detail::avx2_table;
#endif
            return detail::scalar_table;
    }
}

namespace {
std::atomic<const KernelTable*> g_active{nullptr};
}

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = &table(Backend::automatic);
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void select(Backend b) {
    g_active.store(&table(b), std::memory_order_release);
}

std::string active_name() { return active().name; }

}  // namespace mgdual::kernels
