#pragma once

#include <string>
#include <string_view>

namespace fimforge {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws fimforge::Error when unreadable.
std::string sha256_file(const std::string& path);

}  // namespace fimforge
