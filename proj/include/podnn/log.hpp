// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_LOG_HPP
#define PODNN_LOG_HPP

#include <functional>
#include <string>

namespace podnn::log
{

using Sink = std::function<void(const std::string &)>;

// Warnings go to stderr unless a sink is installed. Returns the previous sink.
Sink set_warning_sink(Sink sink);
void warn(const std::string &message);

} // namespace podnn::log

#endif // PODNN_LOG_HPP
