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

#include <atomic>

#include "latkit/errors.hpp"
#include "latkit/kernels.hpp"

namespace latkit::kernels {

namespace {

Isa detect() noexcept { return avx2_available() ? Isa::kAvx2 : Isa::kScalar; }

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

const char* to_string(Isa isa) noexcept { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool avx2_available() noexcept {
#if defined(LATKIT_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return selected().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) noexcept {
  if (isa == Isa::kAvx2 && !avx2_available()) isa = Isa::kScalar;
  selected().store(isa, std::memory_order_relaxed);
  return isa;
}

void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out) {
  if (starts.size() != ends.size() || out.size() != starts.size()) {
    throw ContractError("iou_one_to_many: span sizes differ");
  }
#if defined(LATKIT_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::iou_one_to_many(start, end, starts, ends, out);
#endif
  scalar::iou_one_to_many(start, end, starts, ends, out);
}

void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out) {
  if (channels < 1 || interleaved.size() < out.size() * static_cast<std::size_t>(channels)) {
    throw ContractError("downmix: channel count or buffer size mismatch");
  }
#if defined(LATKIT_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::downmix(interleaved, channels, out);
#endif
  scalar::downmix(interleaved, channels, out);
}

}  // namespace latkit::kernels
