/*
 * Copyright 2026 The adace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "adace/common.hpp"
#include "adace/estimators.hpp"
#include "adace/imputation.hpp"
#include "adace/inference.hpp"
#include "adace/parallel.hpp"
#include "adace/regression.hpp"
#include "adace/rng.hpp"
#include "adace/simulation.hpp"
#include "adace/trial_data.hpp"

namespace adace {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace adace
