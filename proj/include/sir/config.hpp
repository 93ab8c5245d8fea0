#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sir/service.hpp"

namespace sir {

/// Server configuration, read from a small TOML subset:
///
///   listen = "127.0.0.1:8080"
///   store = "store"
///   seed = 42
///   request_timeout_ms = 10000
///   cors_origins = ["https://lms.example.edu"]
///   admin_token = "..."
///   [provider]
///   mock = true
///   url = "https://api.openai.com"
///
/// Only strings, integers, booleans and arrays of strings are accepted.
struct SirConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  ServiceConfig service;
  std::vector<std::string> cors_origins;
  std::string admin_token;  // empty disables /v1/admin
};

SirConfig parse_config(std::string_view text);
SirConfig load_config(const std::filesystem::path& path);

/// SIR_PROVIDER_URL, SIR_PROVIDER_KEY, SIR_SEED and SIR_ADMIN_TOKEN override the file.
void apply_env(SirConfig& cfg);

/// Throws InvalidArgument if the store root cannot be created or written, or
/// the timeout is not positive.
void validate_config(const SirConfig& cfg);

}  // namespace sir
