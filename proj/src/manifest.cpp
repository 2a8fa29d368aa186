#include "magicsim/manifest.h"

#include <openssl/evp.h>

#include <fstream>
#include <iterator>
#include <memory>

#include "magicsim/errors.h"

namespace magicsim {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* const kHex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path + "'");
  }
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

Json to_json(const RunManifest& m) {
  return Json{{"command", m.command},
              {"input_path", m.input_path},
              {"input_sha256", m.input_sha256},
              {"base_seed", m.base_seed},
              {"tool_version", m.tool_version},
              {"options", m.options},
              {"outputs", m.outputs}};
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.input_path = j.at("input_path").get<std::string>();
    m.input_sha256 = j.at("input_sha256").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.options = j.at("options");
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run manifest: ") + e.what());
  }
  if (!m.options.is_object()) {
    throw ConfigError("invalid run manifest: options must be an object");
  }
  return m;
}

}  // namespace magicsim
