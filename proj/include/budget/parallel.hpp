#pragma once

#include <cstddef>
#include <functional>

namespace budget {

// Process-wide worker count for parallel_for (set from --jobs). Work items
// write to preallocated slots and derive their own seeds, so any job count
// produces bit-identical results.
void set_jobs(std::size_t jobs);
std::size_t jobs();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace budget
