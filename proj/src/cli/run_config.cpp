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

#include "wlab/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "wlab/error.hpp"
#include "wlab/io.hpp"

namespace wlab::cli {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::map<std::string, std::string> RunConfig::parse_text(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
        }
        std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, trim(t.substr(eq + 1))).second) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

std::map<std::string, std::string> RunConfig::parse_file(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
    return parse_text(read_file(path));
}

RunConfig RunConfig::resolve(const Schema& schema, const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& flag_values) {
    RunConfig cfg;
    for (const auto& spec : schema) cfg.values_[spec.key] = spec.default_value;
    for (const auto* layer : {&file_values, &flag_values}) {
        for (const auto& [k, v] : *layer) {
            if (!cfg.values_.count(k)) throw ConfigError("unknown config key '" + k + "'");
            cfg.set(k, v);
        }
    }
    return cfg;
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key '" + key + "' is not defined");
    return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
    const auto& v = get(key);
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const auto& v = get(key);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("config key '" + key + "': not a non-negative integer: '" + v + "'");
    }
    return out;
}

double RunConfig::get_double(const std::string& key) const {
    const auto& v = get(key);
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(out)) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
    return out;
}

bool RunConfig::get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected on/off, got '" + v + "'");
}

void RunConfig::set(const std::string& key, std::string value) {
    if (value.find('\n') != std::string::npos) throw ConfigError("config key '" + key + "': value spans lines");
    values_[key] = trim(value);
}

std::string RunConfig::serialize(std::string_view command) const {
    std::string out = "# resolved configuration for: wlab " + std::string(command) + "\n";
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

}  // namespace wlab::cli
