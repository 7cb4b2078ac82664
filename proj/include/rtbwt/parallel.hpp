#pragma once

namespace rtbwt {

/// Runtime switch for the OpenMP code paths. When disabled, every kernel
/// runs its serial schedule regardless of OMP_NUM_THREADS. Kernels are
/// written so that serial and parallel execution produce bit-identical
/// results; the switch exists for benchmarking and for pinning down the
/// single-threaded cost of a run.
void set_parallel(bool enabled);
bool parallel_enabled();

/// Number of worker threads the parallel schedule would use (1 when
/// parallelism is disabled or OpenMP is unavailable).
int worker_count();

} // namespace rtbwt
