#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace avgraph {

// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);

// Digest over a file set: per-file SHA-256 raw digests are concatenated in
// sorted-path order and hashed again. An empty set yields the digest of the
// empty string (e3b0c442...).
std::string input_digest(std::vector<std::string> paths);

}  // namespace avgraph
