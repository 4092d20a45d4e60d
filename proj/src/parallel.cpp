#include "rhls/parallel.hpp"

#include <exception>
#include <limits>
#include <mutex>

#include <omp.h>

namespace rhls {

namespace {
int g_threads = 0;
}

void set_num_threads(int n) { g_threads = n < 0 ? 0 : n; }

int num_threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const long long n = static_cast<long long>(count);
    std::mutex mu;
    std::exception_ptr first;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 16) num_threads(num_threads())
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            // lowest failing index wins so the rethrown error is deterministic
            if (static_cast<std::size_t>(i) < first_index) {
                first_index = static_cast<std::size_t>(i);
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

} // namespace rhls
