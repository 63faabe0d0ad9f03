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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wlab::corpus {

enum class EditKind { InvalidUtf8, LineEnding, ControlChar, Email, Url, Phone, BlankLines };

std::string_view edit_kind_name(EditKind kind);

struct Edit {
    EditKind kind;
    std::size_t offset;  // byte offset in the output of the stage that made the edit

    friend bool operator==(const Edit&, const Edit&) = default;
};

struct CleanResult {
    std::string text;
    std::vector<Edit> edits;
};

// Total and idempotent. Stages, in order:
//   1. invalid UTF-8 bytes -> U+FFFD
//   2. CRLF and lone CR -> LF
//   3. drop control characters other than tab and newline (C0, DEL, C1)
//   4. URLs -> <URL>, e-mail addresses -> <EMAIL>, phone numbers -> <PHONE>,
//      repeated until nothing matches
//   5. runs of more than two blank lines collapse to exactly two
CleanResult clean_text(std::string_view raw);

// Pattern counters, using the same matchers as the anonymizer.
std::size_t count_urls(std::string_view text);
std::size_t count_emails(std::string_view text);
// 9-15 digits, optional leading '+', single spaces or dashes between digits.
std::size_t count_phones(std::string_view text);

}  // namespace wlab::corpus
