#include "ebd/http_json.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ebd/error.hpp"

namespace ebd {

void EndpointConfig::validate() const {
  if (base_url.empty()) throw InputDomainError("endpoint base_url is empty");
  if (!(timeout_s > 0.0)) throw InputDomainError("endpoint timeout must be > 0");
  if (max_retries < 0 || max_retries > 10) {
    throw InputDomainError("endpoint max_retries must lie in [0, 10]");
  }
  if (!(retry_backoff_s >= 0.0)) throw InputDomainError("retry_backoff must be >= 0");
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

double jitter(double upper) {
  thread_local std::mt19937_64 engine{std::random_device{}()};
  return std::uniform_real_distribution<double>(0.0, upper)(engine);
}

std::string server_message(const std::string& body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_object()) {
    if (doc.contains("error")) {
      const auto& err = doc["error"];
      if (err.is_object() && err.contains("message") && err["message"].is_string()) {
        return err["message"].get<std::string>();
      }
      if (err.is_string()) return err.get<std::string>();
    }
    if (doc.contains("message") && doc["message"].is_string()) {
      return doc["message"].get<std::string>();
    }
  }
  return body;
}

}  // namespace

JsonPoster::JsonPoster(EndpointConfig config)
    : config_(std::move(config)),
      sleeper_([](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); }) {
  config_.validate();
  std::string url = config_.base_url;
  if (url.find("://") == std::string::npos) url = "http://" + url;
  const auto host_begin = url.find("://") + 3;
  const auto path_begin = url.find('/', host_begin);
  scheme_host_port_ = url.substr(0, path_begin);
  if (path_begin != std::string::npos) {
    path_prefix_ = url.substr(path_begin);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (!config_.auth_token_env.empty()) {
    const char* token = std::getenv(config_.auth_token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw InputDomainError("auth token variable " + config_.auth_token_env + " is not set");
    }
    bearer_ = token;
  }
  if (!config_.audit_path.empty()) {
    audit_ = std::make_unique<std::ofstream>(config_.audit_path, std::ios::app);
    if (!*audit_) {
      throw InputDomainError("cannot open audit file " + config_.audit_path.string());
    }
  }
}

JsonPoster::~JsonPoster() = default;

void JsonPoster::set_sleeper(std::function<void(std::chrono::duration<double>)> sleeper) {
  sleeper_ = std::move(sleeper);
}

void JsonPoster::audit(const std::string& path, const std::string& request, int status,
                       const std::string& response, int attempt, double ms) const {
  if (!audit_) return;
  nlohmann::ordered_json line;
  line["path"] = path;
  line["attempt"] = attempt;
  line["status"] = status;
  line["elapsed_ms"] = ms;
  auto req = nlohmann::json::parse(request, nullptr, false);
  line["request"] = req.is_discarded() ? nlohmann::json(request) : req;
  auto resp = nlohmann::json::parse(response, nullptr, false);
  line["response"] = resp.is_discarded() ? nlohmann::json(response) : resp;
  std::lock_guard lock(audit_mutex_);
  *audit_ << line.dump() << '\n';
  audit_->flush();
}

PostResult JsonPoster::post(const std::string& path, const std::string& body) const {
  const auto started = std::chrono::steady_clock::now();
  const std::string full_path = path_prefix_ + path;
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  httplib::Headers headers;
  if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);

  std::string last_failure;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double cap = config_.retry_backoff_s * std::ldexp(1.0, attempt - 1);
      sleeper_(std::chrono::duration<double>(jitter(cap)));
    }
    const auto attempt_started = std::chrono::steady_clock::now();
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    auto res = client.Post(full_path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      audit(full_path, body, 0, last_failure, attempt + 1, elapsed_ms(attempt_started));
      continue;
    }
    audit(full_path, body, res->status, res->body, attempt + 1, elapsed_ms(attempt_started));
    if (res->status >= 200 && res->status < 300) {
      return {res->body, res->status, attempt, elapsed_ms(started)};
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status) + ": " + server_message(res->body);
      continue;
    }
    throw RequestRejected(res->status, server_message(res->body));
  }
  throw BackendUnavailable(scheme_host_port_ + full_path + " unavailable after " +
                               std::to_string(config_.max_retries + 1) +
                               " attempts; last failure: " + last_failure,
                           config_.max_retries + 1);
}

}  // namespace ebd
