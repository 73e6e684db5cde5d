#pragma once

namespace slepian {

// Hot kernels take an execution policy. `parallel` uses OpenMP when the
// library is built with it and degrades to a single thread otherwise; the two
// policies produce bitwise identical results.
enum class Execution { serial, parallel };

int max_threads();

}  // namespace slepian
