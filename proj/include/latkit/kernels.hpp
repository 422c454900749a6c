// Copyright 2026 The latkit Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <span>

// Data-parallel inner loops. Each kernel has a scalar reference and, where the
// target supports it, an AVX2 variant; the dispatching entry points pick one at
// runtime. Variants must agree bit-for-bit with the scalar reference.
namespace latkit::kernels {

enum class Isa { kScalar, kAvx2 };

const char* to_string(Isa isa) noexcept;

/// True when the AVX2 variants were compiled in and the CPU reports AVX2.
bool avx2_available() noexcept;

/// Currently selected variant set.
Isa active_isa() noexcept;

/// Pins the variant set (tests, benchmarking). Requesting kAvx2 on a machine
/// without it falls back to kScalar; the effective choice is returned.
Isa force_isa(Isa isa) noexcept;

/// out[i] = IoU([start, end], [starts[i], ends[i]]) over millisecond values held
/// as doubles. Same semantics as latkit::iou for valid spans.
void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out);

/// Averages interleaved frames of `channels` samples into one sample, rounding
/// toward negative infinity.
void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out);

namespace scalar {
void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out);
void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out);
}  // namespace scalar

#if defined(LATKIT_HAVE_AVX2)
namespace avx2 {
void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out);
// Only stereo has a vector path; other channel counts defer to scalar.
void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out);
}  // namespace avx2
#endif

}  // namespace latkit::kernels
