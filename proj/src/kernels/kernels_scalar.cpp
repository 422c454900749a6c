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

#include <algorithm>

#include "latkit/errors.hpp"
#include "latkit/kernels.hpp"

namespace latkit::kernels::scalar {

void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out) {
  const std::size_t n = starts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double inter = std::min(end, ends[i]) - std::max(start, starts[i]);
    const double hull = std::max(end, ends[i]) - std::min(start, starts[i]);
    if (hull == 0.0) {
      out[i] = 1.0;
    } else if (inter > 0.0) {
      out[i] = inter / hull;
    } else {
      out[i] = 0.0;
    }
  }
}

void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out) {
  const std::size_t frames = out.size();
  if (channels == 1) {
    std::copy_n(interleaved.begin(), frames, out.begin());
    return;
  }
  for (std::size_t f = 0; f < frames; ++f) {
    std::int32_t sum = 0;
    for (int c = 0; c < channels; ++c) sum += interleaved[f * channels + c];
    std::int32_t q = sum / channels;
    if (sum % channels != 0 && sum < 0) --q;
    out[f] = static_cast<std::int16_t>(q);
  }
}

}  // namespace latkit::kernels::scalar
