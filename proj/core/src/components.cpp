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
#include "tilebin/components.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tilebin/error.hpp"
#include "tilebin/image.hpp"

namespace tilebin {

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidArgument("mask dimensions must be >= 1");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 1 || height < 1) throw InvalidArgument("mask dimensions must be >= 1");
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("mask bit count does not match dimensions");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::contains(const BinaryMask& other) const {
  if (other.width_ != width_ || other.height_ != height_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i] != 0 && bits_[i] == 0) return false;
  }
  return true;
}

BinaryMask combine_or(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidArgument("combine_or: mask dimensions differ (" + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs " +
                          std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
  BinaryMask out = a;
  auto dst = out.bits();
  const auto src = b.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  return out;
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  const ImageBuffer img = read_png(path);
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool set = false;
      for (int c = 0; c < img.channels(); ++c) set = set || img.at(x, y, c) != 0;
      mask.set(x, y, set);
    }
  }
  return mask;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  std::transform(mask.bits().begin(), mask.bits().end(), gray.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  write_png(path, ImageBuffer(mask.width(), mask.height(), 1, std::move(gray)));
}

namespace {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }
  std::int32_t find(std::int32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace

Components connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  const bool eight = connectivity == Connectivity::kEight;

  Components out;
  out.width = w;
  out.height = h;
  out.labels.assign(mask.size(), 0);

  // First pass: provisional labels (1-based) merged through the disjoint set.
  DisjointSet sets;
  sets.make();  // slot 0 = background
  auto label = [&](int x, int y) -> std::int32_t& {
    return out.labels[static_cast<std::size_t>(y) * w + x];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::int32_t current = 0;
      auto visit = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        const std::int32_t n = label(nx, ny);
        if (n == 0) return;
        if (current == 0) {
          current = n;
        } else {
          sets.unite(current, n);
        }
      };
      visit(x - 1, y);
      visit(x, y - 1);
      if (eight) {
        visit(x - 1, y - 1);
        visit(x + 1, y - 1);
      }
      label(x, y) = current != 0 ? current : sets.make();
    }
  }

  // Second pass: compact roots into first-encounter order and gather stats.
  std::vector<std::int32_t> final_label;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int32_t& l = label(x, y);
      if (l == 0) continue;
      const std::int32_t root = sets.find(l);
      if (static_cast<std::size_t>(root) >= final_label.size()) {
        final_label.resize(static_cast<std::size_t>(root) + 1, 0);
      }
      if (final_label[root] == 0) {
        final_label[root] = ++out.count;
        out.stats.push_back({0, x, y, x, y});
      }
      l = final_label[root];
      ComponentStats& s = out.stats[static_cast<std::size_t>(l) - 1];
      ++s.area;
      s.x_min = std::min(s.x_min, x);
      s.x_max = std::max(s.x_max, x);
      s.y_min = std::min(s.y_min, y);
      s.y_max = std::max(s.y_max, y);
    }
  }
  return out;
}

}  // namespace tilebin
