#include "uland/parallel.hpp"

namespace uland {

namespace {
int g_threads = 0;  // 0 = hardware concurrency
}

int thread_count() {
    if (g_threads > 0) return g_threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_thread_count(int n) { g_threads = n; }

}  // namespace uland
