#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "magicsim/json_io.h"

namespace magicsim {

inline constexpr const char* kToolVersion = "1.0.0";

std::string sha256_hex(std::string_view data);
// Throws InputError when the file cannot be read.
std::string sha256_file(const std::string& path);

/*
 * Written next to every output. `options` holds every resolved setting of the
 * command, so replaying it with the same input reproduces the outputs.
 */
struct RunManifest {
  std::string command;
  std::string input_path;
  std::string input_sha256;
  std::uint64_t base_seed = 0;
  std::string tool_version = kToolVersion;
  Json options = Json::object();
  std::vector<std::string> outputs;  // file names inside the output directory
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

}  // namespace magicsim
