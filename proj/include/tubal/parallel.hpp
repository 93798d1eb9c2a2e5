#pragma once

namespace tubal::parallel {

// Number of threads used by the OpenMP kernels. Resolution order:
// set_thread_count() (CLI --threads), TUBAL_FGD_THREADS, OpenMP default.
int thread_count();

// 0 restores the default resolution.
void set_thread_count(int n);

}  // namespace tubal::parallel
