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

#include <immintrin.h>

#include <algorithm>

#include "latkit/kernels.hpp"

namespace latkit::kernels::avx2 {

void iou_one_to_many(double start, double end, std::span<const double> starts,
                     std::span<const double> ends, std::span<double> out) {
  const std::size_t n = starts.size();
  const __m256d vs = _mm256_set1_pd(start);
  const __m256d ve = _mm256_set1_pd(end);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_loadu_pd(starts.data() + i);
    const __m256d e = _mm256_loadu_pd(ends.data() + i);
    const __m256d inter = _mm256_sub_pd(_mm256_min_pd(ve, e), _mm256_max_pd(vs, s));
    const __m256d hull = _mm256_sub_pd(_mm256_max_pd(ve, e), _mm256_min_pd(vs, s));
    const __m256d ratio = _mm256_div_pd(inter, hull);
    __m256d r = _mm256_blendv_pd(zero, ratio, _mm256_cmp_pd(inter, zero, _CMP_GT_OQ));
    r = _mm256_blendv_pd(r, one, _mm256_cmp_pd(hull, zero, _CMP_EQ_OQ));
    _mm256_storeu_pd(out.data() + i, r);
  }
  if (i < n) {
    scalar::iou_one_to_many(start, end, starts.subspan(i), ends.subspan(i), out.subspan(i));
  }
}

void downmix(std::span<const std::int16_t> interleaved, int channels, std::span<std::int16_t> out) {
  if (channels != 2) {
    scalar::downmix(interleaved, channels, out);
    return;
  }
  const std::size_t frames = out.size();
  const __m256i ones = _mm256_set1_epi16(1);
  std::size_t f = 0;
  for (; f + 16 <= frames; f += 16) {
    const auto* src = reinterpret_cast<const __m256i*>(interleaved.data() + 2 * f);
    // madd sums each adjacent (left, right) pair into an int32 lane.
    const __m256i lo = _mm256_srai_epi32(_mm256_madd_epi16(_mm256_loadu_si256(src), ones), 1);
    const __m256i hi = _mm256_srai_epi32(_mm256_madd_epi16(_mm256_loadu_si256(src + 1), ones), 1);
    const __m256i packed = _mm256_permute4x64_epi64(_mm256_packs_epi32(lo, hi), 0xD8);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + f), packed);
  }
  if (f < frames) {
    scalar::downmix(interleaved.subspan(2 * f), 2, out.subspan(f));
  }
}

}  // namespace latkit::kernels::avx2
