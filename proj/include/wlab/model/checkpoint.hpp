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
#include <string>

#include "wlab/model/model.hpp"

namespace wlab::model {

// Binary checkpoint layout (all integers little-endian):
//
//   "WLAB"                       4-byte magic
//   u32 version                  kCheckpointVersion
//   u32 n_fields                 config block
//     { u32 name_len, name, i64 value } * n_fields
//   u32 n_params
//     { u32 name_len, name, u32 ndim, u64 dims[ndim], f32 payload[prod(dims)] } * n_params
//
// Float config values (rope_theta, norm_eps) are stored as their IEEE-754
// bit patterns under "<name>_f32bits".
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const TinyModel& model);
// Throws FormatError on bad magic, unsupported version, truncation or trailing
// bytes, and ShapeError naming the first parameter whose shape disagrees with
// the config block.
TinyModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const TinyModel& model, const std::filesystem::path& path);
TinyModel load_checkpoint(const std::filesystem::path& path);

}  // namespace wlab::model
