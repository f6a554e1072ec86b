// Copyright 2026 The bct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef BCT_BCT_HPP_
#define BCT_BCT_HPP_

#include "bct/chain.hpp"
#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"
#include "bct/ctw.hpp"
#include "bct/estimator.hpp"
#include "bct/inference.hpp"
#include "bct/io.hpp"
#include "bct/parallel.hpp"
#include "bct/theory.hpp"
#include "bct/verify.hpp"

#endif  // BCT_BCT_HPP_
