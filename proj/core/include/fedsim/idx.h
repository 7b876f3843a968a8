/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_IDX_H_
#define FEDSIM_IDX_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedsim/data.h"

namespace fedsim {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads an IDX image file (magic 0x803, dims N x rows x cols) and an IDX label
// file (magic 0x801, dim N). Pixels are scaled to [0, 1] by 1/255 and
// num_classes is set to max(label) + 1 (at least 2).
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

// Encoders for the same layout; used to build fixtures and export datasets.
std::vector<std::uint8_t> encode_idx_images(std::uint32_t count, std::uint32_t rows,
                                            std::uint32_t cols,
                                            std::span<const std::uint8_t> pixels);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

}  // namespace fedsim

#endif  // FEDSIM_IDX_H_
