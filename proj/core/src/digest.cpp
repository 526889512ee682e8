#include "avgraph/util/digest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

namespace avgraph {

namespace {

std::array<unsigned char, 32> sha256_raw(const void* data, std::size_t len) {
  std::array<unsigned char, 32> out{};
  unsigned int out_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("digest: EVP_MD_CTX_new failed");
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data, len) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &out_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("digest: SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

std::string to_hex(const std::array<unsigned char, 32>& d) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (unsigned char b : d) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 0xf]);
  }
  return s;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t len) {
  return to_hex(sha256_raw(data, len));
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string input_digest(std::vector<std::string> paths) {
  std::sort(paths.begin(), paths.end());
  std::string concat;
  concat.reserve(paths.size() * 32);
  for (const auto& p : paths) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("digest: cannot open " + p);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    auto d = sha256_raw(bytes.data(), bytes.size());
    concat.append(reinterpret_cast<const char*>(d.data()), d.size());
  }
  return sha256_hex(concat.data(), concat.size());
}

}  // namespace avgraph
