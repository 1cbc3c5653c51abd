#pragma once

#include <cstddef>
#include <functional>

namespace dpcperm {

/// Runs body(i) for every i in [0, count) on up to `workers` threads using
/// contiguous blocks. Bodies must write only to per-index slots; results are
/// then identical for any worker count. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace dpcperm
