#include "manistats/parallel.hpp"

#include <cstdlib>
#include <string>

namespace manistats::par {

Mode& mode() {
#ifdef _OPENMP
  static Mode m = Mode::OpenMP;
#else
  static Mode m = Mode::Serial;
#endif
  return m;
}

int max_threads() {
#ifdef _OPENMP
  if (mode() == Mode::Serial) return 1;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
  if (n <= 1) {
    mode() = Mode::Serial;
    return;
  }
#ifdef _OPENMP
  mode() = Mode::OpenMP;
  omp_set_num_threads(n);
#endif
}

}  // namespace manistats::par
