// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrexplain/prompts.hpp"
#include "lrexplain/types.hpp"

namespace lrexplain {

struct GenerationConfig {
  std::string base_url;
  std::string model_name;
  double temperature = 0.7;
  int max_retries = 3;
  double timeout_seconds = 60.0;
  int requests_per_minute = 60;

  void validate() const;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal HTTP POST abstraction so tests can run against an instrumented
// fake instead of the network.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(
      const std::string& url, const std::string& body,
      const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

// Real transport backed by cpp-httplib.
std::unique_ptr<Transport> make_http_transport(double timeout_seconds);

// Process-wide sliding-window throttle: no 60 s window sees more than
// requests_per_minute acquisitions. Clock and sleep are injectable for
// tests.
class TokenBucket {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleep = std::function<void(std::chrono::milliseconds)>;

  explicit TokenBucket(int requests_per_minute, Clock clock = {},
                       Sleep sleep = {});
  void acquire();

 private:
  int limit_;
  Clock clock_;
  Sleep sleep_;
  std::mutex mu_;
  std::deque<std::chrono::steady_clock::time_point> recent_;
};

// Chat-completion client for explanation generation. Images are passed as
// opaque references (URLs or data URIs) attached to the user message.
class GenerationClient {
 public:
  GenerationClient(GenerationConfig config, std::shared_ptr<Transport> transport,
                   std::shared_ptr<TokenBucket> throttle = nullptr);

  // Throws ProviderError; checks credentials before any network call.
  std::string generate_explanation(const RenderedPrompt& prompt,
                                   const std::string& image_a_ref,
                                   const std::string& image_b_ref);

  static const char* kApiKeyEnv;  // LREXPLAIN_API_KEY

 private:
  GenerationConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<TokenBucket> throttle_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string provider_tag() const = 0;
  virtual int dim() const = 0;
};

// Deterministic offline embedder: lowercase alphanumeric tokens, each
// hashed to 3 signed positions of a 512-dim vector, summed and normalized
// to unit length.
class OfflineHashEmbedder : public Embedder {
 public:
  static constexpr int kDim = 512;
  EmbeddingVector embed(const std::string& text) override;
  std::string provider_tag() const override { return "offline-hash-512"; }
  int dim() const override { return kDim; }
};

// Remote embedding endpoint speaking the usual JSON embedding wire format.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(std::string base_url, std::string model_name,
                 std::shared_ptr<Transport> transport, int max_retries = 3,
                 std::shared_ptr<TokenBucket> throttle = nullptr);

  EmbeddingVector embed(const std::string& text) override;
  std::string provider_tag() const override { return model_name_; }
  int dim() const override { return expected_dim_; }
  void set_expected_dim(int dim) { expected_dim_ = dim; }

  static const char* kApiKeyEnv;          // LREXPLAIN_EMBED_API_KEY
  static const char* kFallbackApiKeyEnv;  // LREXPLAIN_API_KEY

 private:
  std::string base_url_;
  std::string model_name_;
  std::shared_ptr<Transport> transport_;
  int max_retries_;
  std::shared_ptr<TokenBucket> throttle_;
  int expected_dim_ = 1536;
};

// Wraps another embedder with a persistent cache keyed by
// (provider_tag, content hash). A cache hit performs no inner call.
class CachedEmbedder : public Embedder {
 public:
  CachedEmbedder(std::shared_ptr<Embedder> inner, std::string cache_path);
  ~CachedEmbedder() override;

  EmbeddingVector embed(const std::string& text) override;
  std::string provider_tag() const override { return inner_->provider_tag(); }
  int dim() const override { return inner_->dim(); }
  void flush();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::shared_ptr<Embedder> inner_;
};

// Stable 64-bit content hash used as the cache key (FNV-1a, hex).
std::string content_hash(const std::string& text);

struct BatchFailure {
  int index = 0;
  std::string message;
};

struct BatchResult {
  // One entry per input text, in input order; nullopt where the item
  // failed.
  std::vector<std::optional<EmbeddingVector>> vectors;
  std::vector<BatchFailure> failures;
};

// Order-preserving batch embedding with at most `parallelism` in-flight
// calls.
BatchResult embed_batch(const std::vector<std::string>& texts,
                        Embedder& embedder, int parallelism);

}  // namespace lrexplain
