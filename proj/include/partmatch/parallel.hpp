#pragma once

namespace partmatch {

// Worker control for the OpenMP kernels. A count of 0 leaves the
// runtime default untouched. Without OpenMP these are no-ops and every
// kernel runs its loop serially.
void set_worker_count(int workers);
int worker_count();

}  // namespace partmatch
