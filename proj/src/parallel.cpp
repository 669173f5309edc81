// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/parallel.hpp>

#include <atomic>

namespace femlr {

namespace {
std::atomic<int> g_threads{1};
}

int default_threads()
{
    return g_threads.load();
}

void set_default_threads(int threads)
{
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    g_threads.store(threads);
}

} // namespace femlr
