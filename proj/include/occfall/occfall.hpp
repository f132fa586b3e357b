/*
 * Copyright 2026 The occfall Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "occfall/boosting.hpp"
#include "occfall/common.hpp"
#include "occfall/corpus.hpp"
#include "occfall/dataset.hpp"
#include "occfall/eval.hpp"
#include "occfall/haar.hpp"
#include "occfall/image.hpp"
#include "occfall/occlusion.hpp"
#include "occfall/segmentation.hpp"
#include "occfall/svm.hpp"
#include "occfall/synth.hpp"
#include "occfall/trainer.hpp"
