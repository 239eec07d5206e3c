// SPDX-License-Identifier: Apache-2.0
//
// hemiscan - hemispherical received-power mapping toolkit
// Copyright (C) 2026 The hemiscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "hemiscan/errors.hpp"
#include "hemiscan/timestamp.hpp"
#include "hemiscan/geometry.hpp"
#include "hemiscan/planner.hpp"
#include "hemiscan/powermap.hpp"
#include "hemiscan/acquisition.hpp"
#include "hemiscan/simbackend.hpp"
#include "hemiscan/persistence.hpp"
#include "hemiscan/cutplot.hpp"
