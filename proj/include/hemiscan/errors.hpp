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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hemiscan
{
    // Base class for every error raised by the library. kind() is a stable
    // machine-readable tag used by the CLI error line.
    class error : public std::runtime_error
    {
    public:
        error(std::string kind, const std::string &what)
            : std::runtime_error(what), kind_(std::move(kind)) {}

        const std::string &kind() const noexcept { return kind_; }

    private:
        std::string kind_;
    };

#define HEMISCAN_DEFINE_ERROR(name)                                   \
    class name : public error                                         \
    {                                                                 \
    public:                                                           \
        explicit name(const std::string &what) : error(#name, what) {} \
    };

    HEMISCAN_DEFINE_ERROR(InvalidGrid)
    HEMISCAN_DEFINE_ERROR(InvalidSample)
    HEMISCAN_DEFINE_ERROR(DegenerateGeometry)
    HEMISCAN_DEFINE_ERROR(InvalidWorkspace)
    HEMISCAN_DEFINE_ERROR(EmptyPlan)
    HEMISCAN_DEFINE_ERROR(MalformedLog)
    HEMISCAN_DEFINE_ERROR(EmptyMap)
    HEMISCAN_DEFINE_ERROR(PlaneNotSampled)
    HEMISCAN_DEFINE_ERROR(DisjointSupport)
    HEMISCAN_DEFINE_ERROR(NeedAtLeastTwo)
    HEMISCAN_DEFINE_ERROR(MissingGridSpec)
    HEMISCAN_DEFINE_ERROR(InvalidMap)
    HEMISCAN_DEFINE_ERROR(MapFormatError)
    HEMISCAN_DEFINE_ERROR(SensorFault)
    HEMISCAN_DEFINE_ERROR(PositionerFault)

#undef HEMISCAN_DEFINE_ERROR

    // Thrown by run_scan when the positioner cannot reach a pose even after
    // retries. The partially filled map is not returned; the event log up to
    // the abort is available through the observer.
    class Aborted : public error
    {
    public:
        Aborted(std::size_t index, const std::string &what)
            : error("Aborted", what), index_(index) {}

        std::size_t index() const noexcept { return index_; }

    private:
        std::size_t index_;
    };
}
