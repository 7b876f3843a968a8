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

#include "fedsim/idx.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <string>

#include "fedsim/error.h"

namespace fedsim {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  require(offset + 4 <= bytes.size(), ErrorCode::kFormat,
          path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

std::string hex32(std::uint32_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s.push_back(kDigits[(v >> shift) & 0xf]);
  return s;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const std::vector<std::uint8_t> images = read_file(images_path);
  const std::vector<std::uint8_t> labels = read_file(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  require(image_magic == kIdxImagesMagic, ErrorCode::kFormat,
          images_path.string() + ": bad IDX image magic " + hex32(image_magic));
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  require(label_magic == kIdxLabelsMagic, ErrorCode::kFormat,
          labels_path.string() + ": bad IDX label magic " + hex32(label_magic));

  const std::uint32_t count = read_be32(images, 4, images_path);
  const std::uint32_t rows = read_be32(images, 8, images_path);
  const std::uint32_t cols = read_be32(images, 12, images_path);
  const std::uint32_t label_count = read_be32(labels, 4, labels_path);
  require(count == label_count, ErrorCode::kFormat,
          "IDX image/label count mismatch: " + std::to_string(count) + " images vs " +
              std::to_string(label_count) + " labels");
  require(count > 0 && rows > 0 && cols > 0, ErrorCode::kFormat,
          images_path.string() + ": empty IDX image set");

  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t image_bytes = 16 + std::size_t{count} * pixels;
  require(images.size() >= image_bytes, ErrorCode::kFormat,
          images_path.string() + ": truncated IDX image payload");
  require(labels.size() >= 8 + std::size_t{count}, ErrorCode::kFormat,
          labels_path.string() + ": truncated IDX label payload");

  Dataset ds;
  ds.input_dim = pixels;
  ds.features.resize(std::size_t{count} * pixels);
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    ds.features[i] = static_cast<double>(images[16 + i]) / 255.0;
  }
  ds.labels.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ds.labels[i] = labels[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.num_classes = std::max(2, max_label + 1);
  return ds;
}

std::vector<std::uint8_t> encode_idx_images(std::uint32_t count, std::uint32_t rows,
                                            std::uint32_t cols,
                                            std::span<const std::uint8_t> pixels) {
  require(pixels.size() == std::size_t{count} * rows * cols, ErrorCode::kInvalidArgument,
          "encode_idx_images: pixel count does not match dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(16 + pixels.size());
  append_be32(out, kIdxImagesMagic);
  append_be32(out, count);
  append_be32(out, rows);
  append_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  append_be32(out, kIdxLabelsMagic);
  append_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace fedsim
