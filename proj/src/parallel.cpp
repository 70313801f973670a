#include "streamflow/parallel.hpp"

#include <omp.h>

namespace streamflow {

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

ThreadLimit::ThreadLimit(int n) : previous_(omp_get_max_threads()) { set_threads(n); }

ThreadLimit::~ThreadLimit() { omp_set_num_threads(previous_); }

}  // namespace streamflow
