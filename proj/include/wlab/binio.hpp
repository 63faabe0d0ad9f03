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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

#include "wlab/error.hpp"

namespace wlab::binio {

// Little-endian append of a trivially copyable value.
template <typename T>
void put(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

inline void put_string(std::string& out, std::string_view s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

// Bounds-checked little-endian reader. Every failure is a FormatError that
// names the file kind and the field being read.
class Reader {
public:
    Reader(std::string_view bytes, std::string context) : bytes_(bytes), context_(std::move(context)) {}

    template <typename T>
    T get(std::string_view what) {
        need(sizeof(T), what);
        unsigned char b[sizeof(T)];
        std::memcpy(b, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }

    std::string string(std::string_view what, std::size_t max_len = 4096) {
        const auto n = get<std::uint32_t>(what);
        if (n > max_len) fail("implausible " + std::string(what) + " length " + std::to_string(n));
        need(n, what);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    void floats(float* dst, std::size_t n, std::string_view what) {
        need(n * sizeof(float), what);
        for (std::size_t i = 0; i < n; ++i) dst[i] = get<float>(what);
    }

    void expect_magic(std::string_view magic) {
        need(magic.size(), "magic");
        if (bytes_.substr(pos_, magic.size()) != magic) fail("bad magic (expected \"" + std::string(magic) + "\")");
        pos_ += magic.size();
    }

    bool done() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }

    [[noreturn]] void fail(const std::string& msg) const { throw FormatError(context_ + ": " + msg); }

private:
    void need(std::size_t n, std::string_view what) const {
        if (bytes_.size() - pos_ < n) {
            fail("truncated while reading " + std::string(what) + " at byte " + std::to_string(pos_));
        }
    }

    std::string_view bytes_;
    std::string context_;
    std::size_t pos_ = 0;
};

}  // namespace wlab::binio
