#pragma once
// Deterministic data-parallel loops. Results must be written by index into
// pre-sized storage; never merged by completion order. Worker count comes
// from the DBX_THREADS environment variable, else all hardware cores.

#include <functional>

namespace dbx {

int worker_count();

// Runs fn(i) for i in [0, n). Static block partition across workers.
void parallel_for(long n, const std::function<void(long)>& fn);

}  // namespace dbx
