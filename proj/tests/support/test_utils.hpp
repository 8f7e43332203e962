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
#pragma once

#include <sys/socket.h>
#include <netinet/in.h>
#include <arpa/inet.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/components.hpp"
#include "tilebin/image.hpp"
#include "tilebin/segmenter.hpp"

namespace tilebin::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "tilebin") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline ImageBuffer random_image(int w, int h, int channels, std::mt19937_64& rng) {
  ImageBuffer img(w, h, channels);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& s : img.samples()) s = static_cast<std::uint8_t>(d(rng));
  return img;
}

inline BinaryMask random_mask(int w, int h, double density, std::mt19937_64& rng) {
  BinaryMask m(w, h);
  std::bernoulli_distribution d(density);
  for (auto& b : m.bits()) b = d(rng) ? 1 : 0;
  return m;
}

inline AnomalyMap random_map(int w, int h, std::mt19937_64& rng, int quantize = 0) {
  AnomalyMap m(w, h);
  std::uniform_real_distribution<float> d(0.0F, 1.0F);
  for (auto& v : m.values()) {
    v = d(rng);
    if (quantize > 0) v = std::floor(v * quantize) / quantize;
  }
  return m;
}

/// Texture shared by every normal image of the synthetic category.
inline std::uint8_t normal_texture(int x, int y) {
  return static_cast<std::uint8_t>(90 + 20 * (((x / 6) + (y / 6)) % 2));
}

struct PlantedDataset {
  std::vector<std::string> test_ids;
  std::size_t anomalous = 0;
};

/// Writes <root>/<category>/{train,test,ground_truth}: normals carry the
/// shared texture; anomalous test images get 1-3 bright rectangles that are
/// also written as ground truth.
inline PlantedDataset write_planted_category(const std::filesystem::path& root,
                                             const std::string& category, int width, int height,
                                             int n_train, int n_test, std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::mt19937_64 rng(seed);
  const fs::path base = root / category;
  fs::create_directories(base / "train");
  fs::create_directories(base / "test");
  fs::create_directories(base / "ground_truth");
  auto normal = [&] {
    ImageBuffer img(width, height, 1);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) img.at(x, y) = normal_texture(x, y);
    return img;
  };
  for (int i = 0; i < n_train; ++i) {
    write_png(base / "train" / ("train_" + std::to_string(i) + ".png"), normal());
  }
  PlantedDataset ds;
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> size(14, 32);
  std::uniform_int_distribution<int> level(225, 255);
  for (int i = 0; i < n_test; ++i) {
    ImageBuffer img = normal();
    const std::string id = "test_" + std::to_string(i);
    ds.test_ids.push_back(id);
    if (i % 4 == 3) {  // every fourth test image is good
      write_png(base / "test" / (id + ".png"), img);
      continue;
    }
    BinaryMask gt(width, height);
    const int defects = count(rng);
    for (int d = 0; d < defects; ++d) {
      const int dw = size(rng);
      const int dh = size(rng);
      const int x0 = std::uniform_int_distribution<int>(2, width - dw - 2)(rng);
      const int y0 = std::uniform_int_distribution<int>(2, height - dh - 2)(rng);
      const auto v = static_cast<std::uint8_t>(level(rng));
      for (int y = y0; y < y0 + dh; ++y) {
        for (int x = x0; x < x0 + dw; ++x) {
          img.at(x, y) = v;
          gt.set(x, y);
        }
      }
    }
    write_png(base / "test" / (id + ".png"), img);
    write_mask_png(base / "ground_truth" / (id + ".png"), gt);
    ++ds.anomalous;
  }
  return ds;
}

/// Minimal TCP server speaking the segmenter protocol on 127.0.0.1. The
/// handler maps a decoded request to a response line.
class LineServer {
 public:
  using Handler = std::function<std::string(const std::string&)>;

  explicit LineServer(Handler handler) : handler_(std::move(handler)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
    ::listen(fd_, 128);
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }

  ~LineServer() {
    stop_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    thread_.join();
    for (auto& t : workers_) t.join();
  }

  std::string endpoint() const { return "127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

 private:
  void serve() {
    while (!stop_) {
      const int client = ::accept(fd_, nullptr, nullptr);
      if (client < 0) return;
      workers_.emplace_back([this, client] {
        std::string buf;
        char chunk[4096];
        while (buf.find('\n') == std::string::npos) {
          const ssize_t n = ::recv(client, chunk, sizeof(chunk), 0);
          if (n <= 0) break;
          buf.append(chunk, static_cast<std::size_t>(n));
        }
        ++requests_;
        const auto nl = buf.find('\n');
        const std::string reply = handler_(buf.substr(0, nl)) + "\n";
        ::send(client, reply.data(), reply.size(), MSG_NOSIGNAL);
        ::close(client);
      });
    }
  }

  Handler handler_;
  int fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<int> requests_{0};
  std::thread thread_;
  std::vector<std::thread> workers_;
};

/// Echo variant: each box comes back as its filled rectangle, confidence 1.
inline std::string echo_handler(const std::string& line, int width, int height) {
  SegmentRequest req;
  try {
    req = decode_request(line);
  } catch (const std::exception& e) {
    return encode_error_response("", e.what());
  }
  SegmentResponse resp{req.request_id, {}};
  for (std::size_t b = 0; b < req.boxes.size(); ++b) {
    BinaryMask m(width, height);
    const auto& box = req.boxes[b];
    for (int y = box.y_min; y <= box.y_max; ++y)
      for (int x = box.x_min; x <= box.x_max; ++x) m.set(x, y);
    BoxResult r{b, {}};
    r.masks.push_back({std::move(m), 1.0});
    resp.results.push_back(std::move(r));
  }
  return encode_response(resp);
}

}  // namespace tilebin::testing
