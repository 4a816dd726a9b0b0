#pragma once

#include <cstddef>
#include <functional>

namespace autolabel {

/// Worker cap for data-parallel loops: min(hardware threads, AUTOLABEL_THREADS
/// when set, job count); at least 1.
int worker_count(std::size_t jobs);

/// Runs fn(0..count-1) on a fixed block partition across workers and rethrows
/// the first exception. fn must only write to slots it owns.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace autolabel
