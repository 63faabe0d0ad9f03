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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wlab::cli {

struct KeySpec {
    std::string key;
    std::string default_value;
    std::string help;
    bool flag = false;  // on the command line, may be given without a value
};
using Schema = std::vector<KeySpec>;

// Resolved key=value settings for one command. Values come from, in
// increasing priority: schema defaults, a config file, command-line flags.
class RunConfig {
public:
    // "key = value" lines; blank lines and '#' comments are skipped.
    // Throws ConfigError on malformed or duplicate lines.
    static std::map<std::string, std::string> parse_text(std::string_view text);
    static std::map<std::string, std::string> parse_file(const std::filesystem::path& path);

    // Throws ConfigError for any key the schema does not define.
    static RunConfig resolve(const Schema& schema, const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& flag_values);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::size_t get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;  // on/off, true/false, yes/no, 1/0

    void set(const std::string& key, std::string value);

    const std::map<std::string, std::string>& values() const { return values_; }

    // Every key, sorted, preceded by a comment naming the command.
    std::string serialize(std::string_view command) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace wlab::cli
