// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/log.hpp>

#include <atomic>
#include <iostream>
#include <mutex>

namespace femlr::log {

namespace {

std::mutex g_mutex;
std::atomic<std::size_t> g_count{0};

Sink& sink()
{
    static Sink s = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
    return s;
}

} // namespace

Sink set_warning_sink(Sink s)
{
    std::lock_guard lock(g_mutex);
    Sink previous = std::move(sink());
    sink() = std::move(s);
    return previous;
}

void warn(const std::string& message)
{
    ++g_count;
    std::lock_guard lock(g_mutex);
    if (sink()) sink()(message);
}

std::size_t warning_count()
{
    return g_count.load();
}

} // namespace femlr::log
