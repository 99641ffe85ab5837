#pragma once

// Thin wrapper over the OpenMP runtime so callers never include <omp.h>.

namespace pyrewatch::parallel {

/// Worker count used by the parallel kernels: the OpenMP default, capped by
/// the PYREWATCH_THREADS environment variable when set to a positive integer.
int worker_count();

/// Overrides the worker count for subsequent kernels (0 restores the default).
void set_worker_count(int workers);

/// RAII override of the worker count.
class ScopedWorkers {
public:
    explicit ScopedWorkers(int workers);
    ~ScopedWorkers();
    ScopedWorkers(const ScopedWorkers&) = delete;
    ScopedWorkers& operator=(const ScopedWorkers&) = delete;

private:
    int previous_;
};

} // namespace pyrewatch::parallel
