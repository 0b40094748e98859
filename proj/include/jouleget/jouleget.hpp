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

// Umbrella header for the jouleget toolkit: energy accounting over power
// traces, a deterministic transfer simulator, a live HTTP transfer engine,
// dataset generation, parameter tuning, and the benchmark harness.

#include "jouleget/bench.hpp"
#include "jouleget/clock.hpp"
#include "jouleget/datasets.hpp"
#include "jouleget/digest.hpp"
#include "jouleget/energy_accounting.hpp"
#include "jouleget/error.hpp"
#include "jouleget/fixture_server.hpp"
#include "jouleget/netsim.hpp"
#include "jouleget/power_trace.hpp"
#include "jouleget/scenario.hpp"
#include "jouleget/transfer_engine.hpp"
#include "jouleget/transfer_plan.hpp"
#include "jouleget/tuner.hpp"
