#include "densitree/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace densitree {

namespace {
int default_threads() {
#ifdef _OPENMP
  static const int n = omp_get_max_threads();
  return n;
#else
  return 1;
#endif
}
}  // namespace

void set_thread_count(int threads) {
#ifdef _OPENMP
  (void)default_threads();
  omp_set_num_threads(threads > 0 ? threads : default_threads());
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace densitree
