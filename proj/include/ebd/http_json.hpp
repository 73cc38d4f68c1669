#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

namespace ebd {

// Connection and retry policy for a JSON-over-HTTP backend.
struct EndpointConfig {
  std::string base_url;        // e.g. http://127.0.0.1:8000
  std::string model_name;
  std::string auth_token_env;  // empty: no Authorization header
  double timeout_s = 60.0;
  int max_retries = 3;
  double retry_backoff_s = 0.5;  // base of the exponential backoff
  std::filesystem::path audit_path;  // empty: no audit mirror

  // timeout > 0, 0 <= max_retries <= 10, backoff >= 0, base_url set.
  void validate() const;
};

struct PostResult {
  std::string body;
  int status = 0;
  int retries = 0;  // attempts beyond the first
  double wall_ms = 0.0;
};

// POSTs JSON bodies with retry on transport errors, 429 and 5xx. Other 4xx
// raise RequestRejected; exhausted retries raise BackendUnavailable.
// Backoff before retry k (1-based) is uniform in [0, backoff * 2^(k-1)].
// Thread-safe.
class JsonPoster {
 public:
  explicit JsonPoster(EndpointConfig config);
  ~JsonPoster();
  JsonPoster(const JsonPoster&) = delete;
  JsonPoster& operator=(const JsonPoster&) = delete;

  PostResult post(const std::string& path, const std::string& body) const;
  const EndpointConfig& config() const noexcept { return config_; }

  // Replaces the sleep used between retries (tests).
  void set_sleeper(std::function<void(std::chrono::duration<double>)> sleeper);

 private:
  void audit(const std::string& path, const std::string& request, int status,
             const std::string& response, int attempt, double ms) const;

  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string bearer_;
  std::function<void(std::chrono::duration<double>)> sleeper_;
  mutable std::mutex audit_mutex_;
  mutable std::unique_ptr<std::ofstream> audit_;
};

}  // namespace ebd
