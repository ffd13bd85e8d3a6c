/*
 * Copyright 2026 The sgbh Authors.
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

#ifndef SGBH_SGBH_HPP_
#define SGBH_SGBH_HPP_

#include "sgbh/config.hpp"
#include "sgbh/evaluation.hpp"
#include "sgbh/fourier.hpp"
#include "sgbh/gradient.hpp"
#include "sgbh/graph.hpp"
#include "sgbh/losses.hpp"
#include "sgbh/matrix.hpp"
#include "sgbh/model.hpp"
#include "sgbh/random.hpp"
#include "sgbh/retrieval.hpp"
#include "sgbh/sampler.hpp"
#include "sgbh/synthetic.hpp"
#include "sgbh/training.hpp"

#endif  // SGBH_SGBH_HPP_
