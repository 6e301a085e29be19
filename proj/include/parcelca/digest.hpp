#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace pca {

/// Incremental SHA-256, reported as lowercase hex.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t len);
  void update_u32(std::uint32_t v);  // little-endian
  void update_u64(std::uint64_t v);  // little-endian
  void update_double(double v);      // IEEE-754 bits, little-endian

  /// Finalize and return the digest. The object must not be reused.
  std::string hex();

 private:
  void* ctx_;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_hex_of_file(const std::filesystem::path& path);

}  // namespace pca
