#pragma once

#include <cstddef>
#include <functional>

namespace lsh {

/// Worker count: LSH_THREADS when set (>= 1), otherwise hardware parallelism.
std::size_t worker_count();

/// Runs fn(i) for i in [0, count) on worker threads pulling dynamic chunks.
/// fn must be safe to call concurrently for distinct indices.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Compensated (Kahan) accumulator for order-stable means.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double value) {
        const double y = value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace lsh
