#pragma once

#include <string>
#include <string_view>

namespace reflab {

// Lowercase hex SHA-256 of the given bytes. Used as the prompt content hash;
// stable across platforms because it hashes the raw UTF-8 bytes.
std::string sha256_hex(std::string_view bytes);

} // namespace reflab
