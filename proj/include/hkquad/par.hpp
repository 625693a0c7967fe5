#pragma once

#ifdef _OPENMP
#include <omp.h>
#else
namespace hk::detail {
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
}  // namespace hk::detail
using hk::detail::omp_get_max_threads;
using hk::detail::omp_get_thread_num;
#endif

namespace hk {

/// Number of worker threads the parallel kernels may use.
/// HKQUAD_THREADS caps it; 0 or unset means the OpenMP default.
/// Results are bitwise independent of this value: work is split into
/// fixed chunks and partials are combined in chunk order.
int thread_cap();

}  // namespace hk
