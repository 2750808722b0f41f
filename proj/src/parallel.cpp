#include "thinfilm/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace thinfilm {

namespace {
int detect_workers() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#else
  n = int(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
#endif
  if (const char* env = std::getenv("THINFILM_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = int(std::min<long>(n, cap));
  }
  return std::max(n, 1);
}
}  // namespace

int max_workers() {
  static const int n = detect_workers();
  return n;
}

}  // namespace thinfilm
