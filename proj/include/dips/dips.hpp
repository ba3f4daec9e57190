//
// Copyright 2026 The DIPS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

// Umbrella header.

#include "dips/budget.hpp"
#include "dips/dataset.hpp"
#include "dips/error.hpp"
#include "dips/harness.hpp"
#include "dips/hist_synth.hpp"
#include "dips/inference.hpp"
#include "dips/mechanisms.hpp"
#include "dips/models/bernoulli.hpp"
#include "dips/models/gaussian_mixture.hpp"
#include "dips/models/normal.hpp"
#include "dips/models/sequential_logistic.hpp"
#include "dips/param_synth.hpp"
#include "dips/randvar.hpp"
#include "dips/release.hpp"
