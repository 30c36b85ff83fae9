/*
 * Copyright (C) 2026 The reinfect authors
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

#include "reinfect/config.hpp"
#include "reinfect/csv_io.hpp"
#include "reinfect/density.hpp"
#include "reinfect/error.hpp"
#include "reinfect/evidence.hpp"
#include "reinfect/inference.hpp"
#include "reinfect/integrator.hpp"
#include "reinfect/model.hpp"
#include "reinfect/observations.hpp"
#include "reinfect/predictive.hpp"
