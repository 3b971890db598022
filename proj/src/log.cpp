// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "podnn/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace podnn::log
{

namespace
{
std::mutex sink_mutex;
Sink current_sink;
} // namespace

Sink set_warning_sink(Sink sink)
{
  std::lock_guard lock(sink_mutex);
  return std::exchange(current_sink, std::move(sink));
}

void warn(const std::string &message)
{
  std::lock_guard lock(sink_mutex);
  if (current_sink)
    current_sink(message);
  else
    std::cerr << "warning: " << message << '\n';
}

} // namespace podnn::log
