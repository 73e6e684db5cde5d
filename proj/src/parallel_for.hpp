#pragma once

#include <exception>
#include <mutex>

#include "slepian/execution.hpp"

namespace slepian::detail {

// Runs fn(i) for i in [0, n); the first exception thrown by any iteration is
// rethrown on the calling thread.
template <typename Fn>
void parallel_for(long n, Execution exec, Fn&& fn) {
  std::exception_ptr error;
  std::mutex lock;
#pragma omp parallel for schedule(dynamic) if (exec == Execution::parallel)
  for (long i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> guard(lock);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace slepian::detail
