#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "leakscope/llm/cache.hpp"
#include "leakscope/llm/endpoint.hpp"

namespace leakscope::llm {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
  bool jitter = true;
};

// Spaces request starts at least 1/rate apart; rate <= 0 disables it.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second = 0.0);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::nanoseconds interval_{0};
  std::chrono::steady_clock::time_point next_;
};

struct GatewayOptions {
  GenerationSettings settings;
  RetryPolicy retry;
  std::size_t concurrency = 4;
  double requests_per_second = 0.0;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> ledger_path;  // append-only JSONL
};

// Single point of contact with an endpoint: cache lookup, rate limiting,
// retries with exponential backoff and jitter, write-through caching and the
// request ledger. Safe to call from many threads.
class LlmGateway {
 public:
  LlmGateway(LlmEndpoint& endpoint, GatewayOptions options);

  // Throws OracleError once the retry budget is exhausted.
  std::string complete(const Prompt& prompt);

  std::size_t concurrency() const { return options_.concurrency; }
  const GatewayOptions& options() const { return options_; }
  std::string model_id() const { return endpoint_.model_id(); }

  std::size_t endpoint_calls() const { return endpoint_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  std::size_t exhausted() const { return exhausted_.load(); }
  std::size_t cache_corrupt_entries() const { return cache_ ? cache_->corrupt_entries() : 0; }

 private:
  void record(const std::string& key, std::string_view outcome, int attempts);

  LlmEndpoint& endpoint_;
  GatewayOptions options_;
  std::unique_ptr<ResponseCache> cache_;
  RateLimiter limiter_;
  std::mutex ledger_mutex_;
  std::atomic<std::size_t> endpoint_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> exhausted_{0};
};

}  // namespace leakscope::llm
