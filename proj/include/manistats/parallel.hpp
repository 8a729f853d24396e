#pragma once

#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace manistats::par {

enum class Mode { Serial, OpenMP };

// Global kernel mode. Defaults to OpenMP when compiled with it; the CLI maps
// MANISTATS_THREADS=1 to Serial.
Mode& mode();

int max_threads();
void set_threads(int n);

// Evaluates f(i) for i in [0, n) into a slot array. The parallel version
// writes each slot from exactly one iteration, so its output is bit-identical
// to the serial reference regardless of thread count.
template <class T, class F>
std::vector<T> map_indexed(std::int64_t n, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(n));
  if (mode() == Mode::Serial) {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
    return out;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
#else
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
#endif
  return out;
}

// Serial reference kept for tests and the benchmark target.
template <class T, class F>
std::vector<T> map_indexed_serial(std::int64_t n, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
  return out;
}

// Fixed-order pairwise summation; deterministic independent of thread count.
// T needs operator+ and a zero-initializing default constructor is not
// required because n >= 1 slices carry the values themselves.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() == 1) return v[0];
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(std::span<const T>(v));
}

// Plain running-sum reference (different association order; for tests/bench).
template <class T>
T running_sum(const std::vector<T>& v) {
  if (v.empty()) return T{};
  T acc = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) acc = acc + v[i];
  return acc;
}

}  // namespace manistats::par
