#pragma once

#include <openssl/sha.h>

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace chaindrop {

// All canonical values are nlohmann::json built from the default (ordered
// std::map) object type: keys come out lexicographically sorted and dump()
// emits no insignificant whitespace. Hashing and auth tags run over exactly
// these bytes, so two runs that agree on values agree byte-for-byte.
using Json = nlohmann::json;

struct CanonicalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_canonical(const Json& v) {
  switch (v.type()) {
    case Json::value_t::object:
      for (const auto& [_, item] : v.items()) check_canonical(item);
      return;
    case Json::value_t::array:
      for (const auto& item : v) check_canonical(item);
      return;
    case Json::value_t::number_float:
      throw CanonicalizationError("non-integer number in canonical value");
    case Json::value_t::binary:
    case Json::value_t::discarded:
      throw CanonicalizationError("unsupported type in canonical value");
    default:
      return;  // string, integer, boolean, null
  }
}

inline std::string canonical_serialize(const Json& v) {
  check_canonical(v);
  return v.dump();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
         digest);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

}  // namespace chaindrop
