#include "pba/kernels.hpp"

namespace pba::kernels {

const Backend* avx2_impl();  // defined in kernels_avx2.cpp

bool avx2_supported() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
           avx2_impl() != nullptr;
#else
    return false;
#endif
}

const Backend* avx2() { return avx2_supported() ? avx2_impl() : nullptr; }

namespace {
const Backend* g_active = nullptr;
}

const Backend& active() {
    if (!g_active) select_auto();
    return *g_active;
}

void select(const Backend& b) { g_active = &b; }

void select_auto() {
    const Backend* best = avx2();
    g_active = best ? best : &scalar();
}

}  // namespace pba::kernels
