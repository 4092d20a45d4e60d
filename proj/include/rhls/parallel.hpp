#pragma once
#include <cstddef>
#include <functional>

namespace rhls {

// 0 selects the runtime default.
void set_num_threads(int n);
int num_threads();

// Runs body(i) for i in [0, count); each index is processed exactly once and
// results must be written to per-index slots, so output is thread-count independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace rhls
