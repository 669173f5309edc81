// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/types.hpp>

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace femlr {

/// Process-wide default for `parallel_for` when called with threads = 0.
int default_threads();
void set_default_threads(int threads);

///
/// Calls fn(i) for i in [0, n) on contiguous chunks. Each index is visited by
/// exactly one thread, so writing into slot i of a preallocated buffer is
/// race free and the result does not depend on the thread count. The first
/// exception thrown by any worker is rethrown.
///
template <typename F>
void parallel_for(Index n, int threads, F&& fn)
{
    if (threads <= 0) threads = default_threads();
    threads = static_cast<int>(std::clamp<Index>(threads, 1, std::max<Index>(n, 1)));
    if (threads == 1) {
        for (Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex mutex;
    std::vector<std::thread> pool;
    const Index chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const Index begin = w * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (Index i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace femlr
