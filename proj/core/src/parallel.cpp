#include "hhr/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hhr {

namespace {

int env_threads() {
  if (const char* env = std::getenv("HHR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return 0;
}

int g_threads = -1;

}  // namespace

void set_thread_count(int n) {
  g_threads = n > 0 ? n : env_threads();
#ifdef _OPENMP
  if (g_threads > 0) omp_set_num_threads(g_threads);
#endif
}

int thread_count() {
  if (g_threads < 0) set_thread_count(0);
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (g_threads < 0) set_thread_count(0);
#ifdef _OPENMP
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace hhr
