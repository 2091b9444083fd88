// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace twobounce {

/// Worker count used by internal loops. 0 means std::thread::hardware_concurrency().
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Every index is
/// visited by exactly one call, so loops whose iterations write disjoint
/// outputs produce the same bits for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace twobounce
