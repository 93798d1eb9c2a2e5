#include "tubal/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tubal::parallel {

namespace {
std::atomic<int> g_threads{0};

int env_threads() {
    const char* s = std::getenv("TUBAL_FGD_THREADS");
    if (!s) return 0;
    int n = std::atoi(s);
    return n > 0 ? n : 0;
}
}  // namespace

int thread_count() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n > 0) return n;
    n = env_threads();
    if (n > 0) return n;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed); }

}  // namespace tubal::parallel
