// Copyright 2026 The AICRN Authors
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


// Umbrella header: the whole library except the command-line front end.

#ifndef AICRN_AICRN_HPP_
#define AICRN_AICRN_HPP_

#include "aicrn/cbam.hpp"
#include "aicrn/checkpoint.hpp"
#include "aicrn/data.hpp"
#include "aicrn/early_stopping.hpp"
#include "aicrn/error.hpp"
#include "aicrn/gradcheck.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/loss.hpp"
#include "aicrn/meta.hpp"
#include "aicrn/metrics.hpp"
#include "aicrn/network.hpp"
#include "aicrn/ops.hpp"
#include "aicrn/optim.hpp"
#include "aicrn/report.hpp"
#include "aicrn/runtime.hpp"
#include "aicrn/synthetic.hpp"
#include "aicrn/tensor.hpp"
#include "aicrn/timeutil.hpp"
#include "aicrn/train.hpp"

#endif  // AICRN_AICRN_HPP_
