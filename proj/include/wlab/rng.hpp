/*
 * Copyright 2026 The WLab Authors
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

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace wlab {

// Derive a sub-seed for a named purpose ("init", "shuffle", ...) from a root seed.
// Stable across platforms and releases: FNV-1a over the purpose string mixed
// into the seed with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

// Seeded generator with platform-independent distributions. The standard
// library distributions are implementation-defined, so we only use the raw
// mt19937_64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();                          // [0, 1)
    double uniform(double lo, double hi);
    std::uint64_t below(std::uint64_t n);      // [0, n), unbiased
    double normal();                           // N(0, 1), Box-Muller
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wlab
