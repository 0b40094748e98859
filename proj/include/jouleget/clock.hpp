// Copyright 2026 The jouleget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>

namespace jouleget {

/// Injectable timing source so transfer timing is testable without wall
/// clocks.
class Clock {
public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
};

/// Monotonic wall clock, seconds since first use.
class SteadyClock : public Clock {
public:
  double now() const override {
    using namespace std::chrono;
    static const steady_clock::time_point epoch = steady_clock::now();
    return duration<double>(steady_clock::now() - epoch).count();
  }
};

/// Hand-advanced clock for tests.
class ManualClock : public Clock {
public:
  explicit ManualClock(double start = 0.0) : t_(start) {}
  double now() const override { return t_.load(); }
  void advance(double dt) { t_.store(t_.load() + dt); }
  void set(double t) { t_.store(t); }

private:
  std::atomic<double> t_;
};

} // namespace jouleget
