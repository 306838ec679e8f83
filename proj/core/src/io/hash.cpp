#include "e2o/io/hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"

namespace e2o::io {

namespace {

class Sha1 {
 public:
  Sha1() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha1(), nullptr) != 1) throw Error("SHA-1 initialisation failed");
  }
  void update(const void* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw Error("SHA-1 update failed");
  }
  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest, &len) != 1) throw Error("SHA-1 finalisation failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha1_hex(std::span<const std::uint8_t> bytes) {
  Sha1 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string git_blob_id(std::span<const std::uint8_t> bytes) {
  Sha1 h;
  const std::string prefix = "blob " + std::to_string(bytes.size());
  h.update(prefix.data(), prefix.size() + 1);
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string git_blob_id_of_file(const std::filesystem::path& path) { return git_blob_id(read_file(path)); }

}  // namespace e2o::io
