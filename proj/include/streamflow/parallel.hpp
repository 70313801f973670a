#pragma once

#include <cstddef>

namespace streamflow {

// Data-parallel kernels (batched MLP gradients, pairwise costs, batched ODE
// generation, oracle field estimates) run under OpenMP. Each has a serial
// reference in namespace streamflow::reference that tests compare against.
//
// Work is always split into fixed-size row blocks and reduced in block
// order, so results do not depend on the thread count.
inline constexpr std::size_t kRowBlock = 64;

int max_threads();

// Sets the OpenMP thread count for the calling thread's subsequent regions.
void set_threads(int n);

// RAII guard restoring the previous thread count.
class ThreadLimit {
 public:
  explicit ThreadLimit(int n);
  ~ThreadLimit();
  ThreadLimit(const ThreadLimit&) = delete;
  ThreadLimit& operator=(const ThreadLimit&) = delete;

 private:
  int previous_;
};

}  // namespace streamflow
