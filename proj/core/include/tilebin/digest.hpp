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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tilebin {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string relative_path;  // generic form, relative to the digest root
  std::string sha256;
};

/// Digests of every regular file below `root` (recursive), sorted by path.
std::vector<FileDigest> digest_files(const std::filesystem::path& root);

/// Single digest over (path, digest) pairs; order-sensitive, so callers pass
/// sorted lists.
std::string combine_digests(const std::vector<FileDigest>& files);

}  // namespace tilebin
