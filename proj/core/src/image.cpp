/*
 * Copyright 2026 The tilebin Authors
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
#include "tilebin/image.hpp"

#include <png.h>

#include <string>

#include "tilebin/error.hpp"

namespace tilebin {

namespace {

void validate_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("image dimensions must be >= 1, got " +
                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InvalidArgument("image channels must be 1 or 3, got " +
                          std::to_string(channels));
  }
}

std::size_t expected_samples(int width, int height, int channels) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
         static_cast<std::size_t>(channels);
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  validate_shape(width, height, channels);
  data_.assign(expected_samples(width, height, channels), fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels,
                         std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  validate_shape(width, height, channels);
  if (data_.size() != expected_samples(width, height, channels)) {
    throw InvalidArgument("image data length " + std::to_string(data_.size()) +
                          " does not match " + std::to_string(width) + "x" +
                          std::to_string(height) + "x" + std::to_string(channels));
  }
}

double ImageBuffer::gray(int x, int y) const noexcept {
  const std::size_t base = index(x, y, 0);
  if (channels_ == 1) return data_[base];
  return (static_cast<double>(data_[base]) + data_[base + 1] + data_[base + 2]) / 3.0;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw NotFound("image not found: " + path.string());
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0) {
    throw FormatError("cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(img));
  if (png_image_finish_read(&img, nullptr, data.data(), 0, nullptr) == 0) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return ImageBuffer(static_cast<int>(img.width), static_cast<int>(img.height),
                     channels, std::move(data));
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (png_image_write_to_file(&img, path.c_str(), 0, image.samples().data(), 0,
                              nullptr) == 0) {
    throw Error("cannot write PNG " + path.string() + ": " + img.message);
  }
}

}  // namespace tilebin
