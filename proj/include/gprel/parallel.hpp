#pragma once

#include <cstddef>
#include <functional>

namespace gprel {

// Worker count: GP_RELEVANCE_THREADS when set to a positive integer,
// otherwise the number of hardware threads.
std::size_t worker_count();

// Runs body(i) for i in [0, count). Each index is visited exactly once; the
// caller owns output ordering by writing into slot i. Nested calls from
// inside a worker run serially. The first exception thrown by any body is
// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gprel
