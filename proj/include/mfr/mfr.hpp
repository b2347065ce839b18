/*
 * Copyright (c) 2026 The MFR Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Convenience umbrella for the library proper. The HTTP layer (mfr/http.hpp)
// and command line (mfr/cli.hpp) are opt-in.

#include "mfr/attention.hpp"
#include "mfr/catalog.hpp"
#include "mfr/chunker.hpp"
#include "mfr/diffusion.hpp"
#include "mfr/error.hpp"
#include "mfr/half.hpp"
#include "mfr/image.hpp"
#include "mfr/kmeans.hpp"
#include "mfr/palettizer.hpp"
#include "mfr/prompt.hpp"
#include "mfr/service.hpp"
#include "mfr/tensor.hpp"
#include "mfr/toy_models.hpp"
#include "mfr/weight_store.hpp"
