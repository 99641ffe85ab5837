#include "pyrewatch/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pyrewatch::parallel {
namespace {

int g_override = 0;

int env_cap()
{
    const char* raw = std::getenv("PYREWATCH_THREADS");
    if (raw == nullptr) return 0;
    try {
        const int value = std::stoi(raw);
        return value > 0 ? value : 0;
    } catch (...) {
        return 0;
    }
}

} // namespace

int worker_count()
{
#ifdef _OPENMP
    int workers = g_override > 0 ? g_override : omp_get_max_threads();
#else
    int workers = g_override > 0 ? g_override : 1;
#endif
    const int cap = env_cap();
    if (cap > 0 && workers > cap) workers = cap;
    return workers < 1 ? 1 : workers;
}

void set_worker_count(int workers) { g_override = workers > 0 ? workers : 0; }

ScopedWorkers::ScopedWorkers(int workers) : previous_(g_override) { set_worker_count(workers); }

ScopedWorkers::~ScopedWorkers() { g_override = previous_; }

} // namespace pyrewatch::parallel
