/*
 * Copyright 2026 The OPCT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OPCT_OPCT_HPP_
#define OPCT_OPCT_HPP_

#include "opct/baseline.hpp"
#include "opct/benchmark.hpp"
#include "opct/binary_io.hpp"
#include "opct/common.hpp"
#include "opct/data.hpp"
#include "opct/ensemble.hpp"
#include "opct/importance.hpp"
#include "opct/matrix.hpp"
#include "opct/metrics.hpp"
#include "opct/preprocess.hpp"
#include "opct/split.hpp"
#include "opct/synthetic.hpp"
#include "opct/tree.hpp"

#endif  // OPCT_OPCT_HPP_
