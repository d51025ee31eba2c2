#include "leakscope/llm/gateway.hpp"

#include <ctime>
#include <random>
#include <thread>

#include "leakscope/io.hpp"

namespace leakscope::llm {

using nlohmann::json;

namespace {

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int failed_attempts) {
  double ms = static_cast<double>(policy.initial_backoff.count());
  for (int i = 1; i < failed_attempts; ++i) ms *= policy.multiplier;
  ms = std::min(ms, static_cast<double>(policy.max_backoff.count()));
  if (policy.jitter && ms > 0) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    ms *= std::uniform_real_distribution<double>(0.5, 1.0)(rng);
  }
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_second) : next_(std::chrono::steady_clock::now()) {
  if (requests_per_second > 0)
    interval_ = std::chrono::nanoseconds(static_cast<long long>(1e9 / requests_per_second));
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

LlmGateway::LlmGateway(LlmEndpoint& endpoint, GatewayOptions options)
    : endpoint_(endpoint), options_(std::move(options)), limiter_(options_.requests_per_second) {
  if (options_.concurrency == 0) options_.concurrency = 1;
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
  if (options_.cache_dir) cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
}

void LlmGateway::record(const std::string& key, std::string_view outcome, int attempts) {
  if (!options_.ledger_path) return;
  json line = {{"request", key},
               {"model", endpoint_.model_id()},
               {"settings", options_.settings.to_json()},
               {"timestamp", utc_now()},
               {"outcome", outcome},
               {"attempts", attempts}};
  std::lock_guard lock(ledger_mutex_);
  append_line(*options_.ledger_path, line.dump());
}

std::string LlmGateway::complete(const Prompt& prompt) {
  const auto key = ResponseCache::key(endpoint_.model_id(), prompt, options_.settings);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      cache_hits_.fetch_add(1);
      record(key, "cache_hit", 0);
      return *hit;
    }
  }

  std::string last_error;
  const int max_attempts = options_.retry.max_attempts;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    limiter_.acquire();
    endpoint_calls_.fetch_add(1);
    try {
      auto response = endpoint_.complete(prompt, options_.settings);
      if (cache_) cache_->put(key, endpoint_.model_id(), options_.settings, response);
      record(key, "ok", attempt);
      return response;
    } catch (const EndpointFailure& e) {
      last_error = e.what();
    }
    if (attempt < max_attempts) std::this_thread::sleep_for(backoff_delay(options_.retry, attempt));
  }
  exhausted_.fetch_add(1);
  record(key, "error: " + last_error, max_attempts);
  throw OracleError("oracle request failed after " + std::to_string(max_attempts) +
                        " attempts: " + last_error,
                    max_attempts);
}

}  // namespace leakscope::llm
