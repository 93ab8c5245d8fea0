#include "sir/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "sir/error.hpp"
#include "sir/fsutil.hpp"

namespace sir {

namespace {

using Value = std::variant<std::string, long long, bool, std::vector<std::string>>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(int line, const std::string& msg) {
  throw Error(Errc::Parse, "config line " + std::to_string(line) + ": " + msg);
}

// Parses a basic quoted string starting at s[0] == '"'; returns chars consumed.
std::size_t parse_string(std::string_view s, std::string& out, int line) {
  out.clear();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') return i + 1;
    if (c == '\\') {
      if (++i == s.size()) break;
      switch (s[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: bad(line, "unsupported escape");
      }
    } else {
      out += c;
    }
  }
  bad(line, "unterminated string");
}

std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_str) {
      ++i;
    } else if (s[i] == '"') {
      in_str = !in_str;
    } else if (s[i] == '#' && !in_str) {
      return s.substr(0, i);
    }
  }
  return s;
}

Value parse_value(std::string_view v, int line) {
  if (v.empty()) bad(line, "missing value");
  if (v.front() == '"') {
    std::string out;
    if (parse_string(v, out, line) != v.size()) bad(line, "trailing characters after string");
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') bad(line, "unterminated array");
    std::vector<std::string> items;
    auto rest = trim(v.substr(1, v.size() - 2));
    while (!rest.empty()) {
      if (rest.front() != '"') bad(line, "arrays hold strings only");
      std::string item;
      rest = trim(rest.substr(parse_string(rest, item, line)));
      items.push_back(std::move(item));
      if (rest.empty()) break;
      if (rest.front() != ',') bad(line, "expected ','");
      rest = trim(rest.substr(1));
    }
    return items;
  }
  long long n = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc{} || p != v.data() + v.size()) bad(line, "unsupported value '" + std::string(v) + "'");
  return n;
}

template <class T>
T take(const std::map<std::string, Value>& kv, const std::string& key, T fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (auto* v = std::get_if<T>(&it->second)) return *v;
  throw Error(Errc::Parse, "config key '" + key + "' has the wrong type");
}

}  // namespace

SirConfig parse_config(std::string_view text) {
  static const std::set<std::string> kKnown = {
      "listen", "store", "seed", "request_timeout_ms", "cors_origins", "admin_token",
      "max_inflight", "prompt_template", "grounding", "provider.mock", "provider.url",
      "provider.key", "provider.generation_model", "provider.vision_model",
      "provider.embedding_model", "provider.embedding_dim", "provider.timeout_ms"};

  std::map<std::string, Value> kv;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') bad(line, "bad section header");
      section = std::string(trim(s.substr(1, s.size() - 2)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) bad(line, "expected key = value");
    auto key = std::string(trim(s.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    if (!kKnown.count(key)) bad(line, "unknown key '" + key + "'");
    if (kv.count(key)) bad(line, "duplicate key '" + key + "'");
    kv[key] = parse_value(trim(s.substr(eq + 1)), line);
  }

  SirConfig cfg;
  const auto listen = take<std::string>(kv, "listen", cfg.host + ":" + std::to_string(cfg.port));
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::Parse, "listen must be host:port");
  cfg.host = listen.substr(0, colon);
  const auto port = listen.substr(colon + 1);
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), cfg.port);
  if (ec != std::errc{} || p != port.data() + port.size() || cfg.port < 0 || cfg.port > 65535) {
    throw Error(Errc::Parse, "bad listen port '" + port + "'");
  }

  auto& svc = cfg.service;
  svc.store_root = take<std::string>(kv, "store", svc.store_root.string());
  svc.seed = static_cast<std::uint64_t>(take<long long>(kv, "seed", 0));
  svc.request_timeout =
      std::chrono::milliseconds(take<long long>(kv, "request_timeout_ms", svc.request_timeout.count()));
  svc.max_inflight = static_cast<std::size_t>(take<long long>(kv, "max_inflight", 4));
  svc.grounding = take<bool>(kv, "grounding", true);
  if (auto t = take<std::string>(kv, "prompt_template", ""); !t.empty()) svc.prompt_template = t;
  cfg.cors_origins = take<std::vector<std::string>>(kv, "cors_origins", {});
  cfg.admin_token = take<std::string>(kv, "admin_token", "");

  svc.mock_providers = take<bool>(kv, "provider.mock", true);
  auto& live = svc.live;
  live.base_url = take<std::string>(kv, "provider.url", "");
  live.api_key = take<std::string>(kv, "provider.key", "");
  live.generation_model = take<std::string>(kv, "provider.generation_model", live.generation_model);
  live.vision_model = take<std::string>(kv, "provider.vision_model", live.vision_model);
  live.embedding_model = take<std::string>(kv, "provider.embedding_model", live.embedding_model);
  live.embedding_dimension = static_cast<std::size_t>(
      take<long long>(kv, "provider.embedding_dim", static_cast<long long>(live.embedding_dimension)));
  live.timeout = std::chrono::milliseconds(take<long long>(kv, "provider.timeout_ms", live.timeout.count()));
  return cfg;
}

SirConfig load_config(const std::filesystem::path& path) {
  return parse_config(fsutil::read_file(path));
}

void apply_env(SirConfig& cfg) {
  cfg.service.live.apply_env();
  if (const char* seed = std::getenv("SIR_SEED"); seed && *seed) {
    std::uint64_t v = 0;
    const std::string_view s(seed);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw Error(Errc::Parse, "SIR_SEED is not an unsigned integer");
    }
    cfg.service.seed = v;
  }
  if (const char* tok = std::getenv("SIR_ADMIN_TOKEN"); tok && *tok) cfg.admin_token = tok;
}

void validate_config(const SirConfig& cfg) {
  if (cfg.service.request_timeout.count() <= 0) {
    throw Error(Errc::InvalidArgument, "request timeout must be positive");
  }
  if (cfg.service.max_inflight == 0) throw Error(Errc::InvalidArgument, "max_inflight must be positive");
  std::error_code ec;
  std::filesystem::create_directories(cfg.service.store_root, ec);
  const auto probe = cfg.service.store_root / ".write-probe";
  std::ofstream out(probe);
  if (ec || !out) {
    throw Error(Errc::InvalidArgument,
                "store root " + cfg.service.store_root.string() + " is not writable");
  }
  out.close();
  std::filesystem::remove(probe, ec);
}

}  // namespace sir
