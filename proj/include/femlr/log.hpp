// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

namespace femlr::log {

using Sink = std::function<void(const std::string&)>;

/// Replace the warning sink (default writes to stderr). Returns the previous sink.
Sink set_warning_sink(Sink sink);

void warn(const std::string& message);

/// Number of warnings emitted since process start.
std::size_t warning_count();

} // namespace femlr::log
