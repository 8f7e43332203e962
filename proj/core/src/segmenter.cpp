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
#include "tilebin/segmenter.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <sys/un.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include <json.hpp>

namespace tilebin {

using nlohmann::json;

SegmentResponse NullSegmenter::segment(const SegmentRequest& request,
                                       const SegmentContext& context) {
  const Components& cc = context.components;
  SegmentResponse response{request.request_id, {}};
  for (std::size_t b = 0; b < request.boxes.size(); ++b) {
    const int label = request.boxes[b].source_component_label;
    BinaryMask mask(cc.width, cc.height);
    auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = cc.labels[i] == label ? 1 : 0;
    BoxResult result{b, {}};
    result.masks.push_back({std::move(mask), 1.0});
    response.results.push_back(std::move(result));
  }
  return response;
}

std::vector<std::int64_t> rle_encode(const BinaryMask& mask) {
  std::vector<std::int64_t> counts;
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (std::uint8_t b : mask.bits()) {
    if (b != current) {
      counts.push_back(run);
      run = 0;
      current = b;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

BinaryMask rle_decode(int width, int height, const std::vector<std::int64_t>& counts) {
  BinaryMask mask(width, height);
  auto bits = mask.bits();
  std::size_t at = 0;
  std::uint8_t value = 0;
  for (std::int64_t run : counts) {
    if (run < 0 || static_cast<std::size_t>(run) > bits.size() - at) {
      throw FormatError("rle: run lengths exceed mask size");
    }
    std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(at), run, value);
    at += static_cast<std::size_t>(run);
    value ^= 1;
  }
  if (at != bits.size()) throw FormatError("rle: run lengths do not cover the mask");
  return mask;
}

std::string encode_request(const SegmentRequest& request) {
  json boxes = json::array();
  for (const auto& b : request.boxes) {
    boxes.push_back({{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}});
  }
  const nlohmann::ordered_json j = {{"request_id", request.request_id},
                                    {"image_path", request.image_path},
                                    {"variant", request.variant},
                                    {"boxes", boxes}};
  return j.dump();
}

SegmentRequest decode_request(const std::string& line) {
  try {
    const json j = json::parse(line);
    SegmentRequest r;
    r.request_id = j.at("request_id").get<std::string>();
    r.image_path = j.at("image_path").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    for (const auto& b : j.at("boxes")) {
      r.boxes.push_back({b.at("x_min").get<int>(), b.at("y_min").get<int>(),
                         b.at("x_max").get<int>(), b.at("y_max").get<int>(), 0});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("segmenter request: ") + e.what());
  }
}

std::string encode_response(const SegmentResponse& response) {
  json results = json::array();
  for (const auto& r : response.results) {
    json masks = json::array();
    for (const auto& m : r.masks) {
      masks.push_back({{"rle",
                        {{"width", m.mask.width()},
                         {"height", m.mask.height()},
                         {"counts", rle_encode(m.mask)}}},
                       {"confidence", m.confidence}});
    }
    results.push_back({{"box_index", r.box_index}, {"masks", masks}});
  }
  const nlohmann::ordered_json j = {{"request_id", response.request_id}, {"results", results}};
  return j.dump();
}

std::string encode_error_response(const std::string& request_id, const std::string& message) {
  const nlohmann::ordered_json j = {{"request_id", request_id}, {"error", message}};
  return j.dump();
}

SegmentResponse decode_response(const std::string& line, int width, int height) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("segmenter response: ") + e.what());
  }
  try {
    SegmentResponse out;
    out.request_id = j.at("request_id").get<std::string>();
    if (j.contains("error")) {
      throw FormatError("segmenter reported error for " + out.request_id + ": " +
                        j.at("error").dump());
    }
    for (const auto& r : j.at("results")) {
      BoxResult box;
      box.box_index = r.at("box_index").get<std::size_t>();
      for (const auto& m : r.at("masks")) {
        const double confidence = m.at("confidence").get<double>();
        if (!(confidence >= 0.0 && confidence <= 1.0)) {
          throw FormatError("segmenter response: confidence outside [0, 1]");
        }
        if (m.contains("rle")) {
          const auto& rle = m.at("rle");
          if (rle.at("width").get<int>() != width || rle.at("height").get<int>() != height) {
            throw FormatError("segmenter response: mask size does not match image");
          }
          box.masks.push_back(
              {rle_decode(width, height, rle.at("counts").get<std::vector<std::int64_t>>()),
               confidence});
        } else {
          BinaryMask mask = read_mask_png(m.at("png_path").get<std::string>());
          if (mask.width() != width || mask.height() != height) {
            throw FormatError("segmenter response: mask size does not match image");
          }
          box.masks.push_back({std::move(mask), confidence});
        }
      }
      std::stable_sort(box.masks.begin(), box.masks.end(),
                       [](const CandidateMask& a, const CandidateMask& b) {
                         return a.confidence > b.confidence;
                       });
      if (box.masks.size() > 3) box.masks.erase(box.masks.begin() + 3, box.masks.end());
      out.results.push_back(std::move(box));
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("segmenter response: ") + e.what());
  } catch (const NotFound& e) {
    throw FormatError(std::string("segmenter response: ") + e.what());
  }
}

namespace {

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

std::string errno_text() { return std::strerror(errno); }

int connect_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("unix:", 0) == 0) {
    const std::string path = endpoint.substr(5);
    sockaddr_un addr{};
    if (path.size() >= sizeof(addr.sun_path)) throw TransportError("socket path too long");
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket: " + errno_text());
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const std::string err = errno_text();
      ::close(fd);
      throw TransportError("connect " + endpoint + ": " + err);
    }
    return fd;
  }
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) {
    throw TransportError("segmenter endpoint must be unix:/path or host:port, got " + endpoint);
  }
  const std::string host = endpoint.substr(0, colon);
  const std::string port = endpoint.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw TransportError("resolve " + endpoint + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    last_error = errno_text();
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw TransportError("connect " + endpoint + ": " + last_error);
  return fd;
}

}  // namespace

SocketSegmenter::SocketSegmenter(std::string endpoint, int attempts,
                                 std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), attempts_(std::max(1, attempts)), timeout_(timeout) {}

std::string SocketSegmenter::round_trip(const std::string& line) const {
  Socket sock(connect_endpoint(endpoint_));
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout_.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout_.count() % 1000) * 1000);
  ::setsockopt(sock.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(sock.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

  const std::string payload = line + "\n";
  std::size_t sent = 0;
  while (sent < payload.size()) {
    const ssize_t n = ::send(sock.get(), payload.data() + sent, payload.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw TransportError("send to " + endpoint_ + ": " + errno_text());
    sent += static_cast<std::size_t>(n);
  }

  std::string reply;
  char buf[65536];
  for (;;) {
    const ssize_t n = ::recv(sock.get(), buf, sizeof(buf), 0);
    if (n < 0) throw TransportError("recv from " + endpoint_ + ": " + errno_text());
    if (n == 0) break;
    reply.append(buf, static_cast<std::size_t>(n));
    if (const auto nl = reply.find('\n'); nl != std::string::npos) {
      reply.resize(nl);
      return reply;
    }
  }
  if (reply.empty()) throw TransportError("segmenter at " + endpoint_ + " closed without reply");
  return reply;
}

SegmentResponse SocketSegmenter::segment(const SegmentRequest& request,
                                         const SegmentContext& context) {
  const std::string line = encode_request(request);
  std::string last_error;
  for (int attempt = 0; attempt < attempts_; ++attempt) {
    try {
      SegmentResponse response =
          decode_response(round_trip(line), context.image.width(), context.image.height());
      if (response.request_id != request.request_id) {
        throw FormatError("segmenter answered request " + response.request_id +
                          " instead of " + request.request_id);
      }
      return response;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  throw TransportError("segmenter failed after " + std::to_string(attempts_) +
                       " attempts: " + last_error);
}

}  // namespace tilebin
