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

#include "lrexplain/providers.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

namespace lrexplain {

using nlohmann::json;

void GenerationConfig::validate() const {
  if (temperature < 0.0 || temperature > 2.0)
    throw UsageError("temperature must be in [0, 2]");
  if (max_retries < 0) throw UsageError("max_retries must be >= 0");
  if (requests_per_minute < 1)
    throw UsageError("requests_per_minute must be positive");
  if (base_url.empty()) throw UsageError("base_url must be configured");
}

namespace {

const char* env_or_null(const char* name) { return std::getenv(name); }

std::string require_api_key(const char* primary, const char* fallback) {
  if (const char* v = env_or_null(primary); v && *v) return v;
  if (fallback)
    if (const char* v = env_or_null(fallback); v && *v) return v;
  throw ProviderError(ProviderError::Kind::Auth,
                      std::string("no API key: set ") + primary +
                          (fallback ? std::string(" (or ") + fallback + ")"
                                    : std::string()));
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

// Shared retry loop: exponential backoff on transient statuses and
// network-level failures.
HttpResponse post_with_retries(Transport& transport, const std::string& url,
                               const std::string& body,
                               const std::vector<std::pair<std::string,
                                                           std::string>>& headers,
                               int max_retries, TokenBucket* throttle) {
  int attempt = 0;
  for (;;) {
    if (throttle) throttle->acquire();
    HttpResponse resp;
    std::string failure;
    try {
      resp = transport.post(url, body, headers);
    } catch (const std::exception& e) {
      failure = e.what();
      resp.status = 0;
    }
    if (resp.status == 200) return resp;
    if (resp.status == 401 || resp.status == 403)
      throw ProviderError(ProviderError::Kind::Auth,
                          "authentication rejected (" +
                              std::to_string(resp.status) + ")");
    const bool retryable = resp.status == 0 || transient_status(resp.status);
    if (!retryable)
      throw ProviderError(ProviderError::Kind::Malformed,
                          "endpoint returned status " +
                              std::to_string(resp.status) + ": " + resp.body);
    if (attempt >= max_retries) {
      const auto kind = resp.status == 429 ? ProviderError::Kind::RateLimited
                        : resp.status == 0 ? ProviderError::Kind::Network
                                           : ProviderError::Kind::Timeout;
      throw ProviderError(kind, "request failed after " +
                                    std::to_string(attempt + 1) + " attempts" +
                                    (failure.empty() ? "" : ": " + failure));
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(100LL << std::min(attempt, 6)));
    ++attempt;
  }
}

class HttplibTransport : public Transport {
 public:
  explicit HttplibTransport(double timeout_seconds)
      : timeout_seconds_(timeout_seconds) {}

  HttpResponse post(const std::string& url, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>&
                        headers) override {
    const auto split = split_url(url);
    httplib::Client client(split.first);
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<long long>(timeout_seconds_ * 1000)));
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<long long>(timeout_seconds_ * 1000)));
    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    auto result = client.Post(split.second, hs, body, "application/json");
    if (!result)
      throw ProviderError(ProviderError::Kind::Network,
                          "transport error: " + httplib::to_string(result.error()));
    return {result->status, result->body};
  }

 private:
  static std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }

  double timeout_seconds_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(double timeout_seconds) {
  return std::make_unique<HttplibTransport>(timeout_seconds);
}

TokenBucket::TokenBucket(int requests_per_minute, Clock clock, Sleep sleep)
    : limit_(requests_per_minute),
      clock_(clock ? std::move(clock)
                   : [] { return std::chrono::steady_clock::now(); }),
      sleep_(sleep ? std::move(sleep) : [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
      }) {
  if (limit_ < 1) throw UsageError("throttle limit must be positive");
}

void TokenBucket::acquire() {
  using namespace std::chrono;
  for (;;) {
    steady_clock::time_point wake{};
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto now = clock_();
      while (!recent_.empty() && now - recent_.front() >= minutes(1))
        recent_.pop_front();
      if (static_cast<int>(recent_.size()) < limit_) {
        recent_.push_back(now);
        return;
      }
      wake = recent_.front() + minutes(1);
    }
    const auto now = clock_();
    if (wake > now)
      sleep_(duration_cast<milliseconds>(wake - now) + milliseconds(1));
  }
}

const char* GenerationClient::kApiKeyEnv = "LREXPLAIN_API_KEY";

GenerationClient::GenerationClient(GenerationConfig config,
                                   std::shared_ptr<Transport> transport,
                                   std::shared_ptr<TokenBucket> throttle)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      throttle_(std::move(throttle)) {
  config_.validate();
  if (!throttle_)
    throttle_ = std::make_shared<TokenBucket>(config_.requests_per_minute);
}

std::string GenerationClient::generate_explanation(
    const RenderedPrompt& prompt, const std::string& image_a_ref,
    const std::string& image_b_ref) {
  const std::string key = require_api_key(kApiKeyEnv, nullptr);

  json body;
  body["model"] = config_.model_name;
  body["temperature"] = config_.temperature;
  body["messages"] = json::array(
      {json{{"role", "system"}, {"content", prompt.system_text}},
       json{{"role", "user"},
            {"content",
             json::array(
                 {json{{"type", "text"}, {"text", prompt.user_text}},
                  json{{"type", "image_url"},
                       {"image_url", json{{"url", image_a_ref}}}},
                  json{{"type", "image_url"},
                       {"image_url", json{{"url", image_b_ref}}}}})}}});

  const auto resp = post_with_retries(
      *transport_, config_.base_url + "/chat/completions", body.dump(),
      {{"Authorization", "Bearer " + key}}, config_.max_retries,
      throttle_.get());
  try {
    const json j = json::parse(resp.body);
    return j.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::Malformed,
                        std::string("malformed completion response: ") +
                            e.what());
  }
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string content_hash(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

EmbeddingVector OfflineHashEmbedder::embed(const std::string& text) {
  if (text.empty())
    throw DataError("embed: empty text");
  EmbeddingVector out;
  out.provider_tag = provider_tag();
  out.values.assign(kDim, 0.0);

  std::string token;
  auto flush_token = [&] {
    if (token.empty()) return;
    const std::uint64_t base = fnv1a64(token);
    for (std::uint64_t probe = 0; probe < 3; ++probe) {
      const std::uint64_t h = splitmix64(base + probe);
      const int idx = static_cast<int>(h % kDim);
      const double sign = (h >> 63) ? 1.0 : -1.0;
      out.values[idx] += sign;
    }
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c))
      token.push_back(static_cast<char>(std::tolower(c)));
    else
      flush_token();
  }
  flush_token();

  double norm2 = 0.0;
  for (double v : out.values) norm2 += v * v;
  if (norm2 <= 0.0)
    throw DataError("embed: text contains no tokens");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out.values) v *= inv;
  return out;
}

const char* RemoteEmbedder::kApiKeyEnv = "LREXPLAIN_EMBED_API_KEY";
const char* RemoteEmbedder::kFallbackApiKeyEnv = "LREXPLAIN_API_KEY";

RemoteEmbedder::RemoteEmbedder(std::string base_url, std::string model_name,
                               std::shared_ptr<Transport> transport,
                               int max_retries,
                               std::shared_ptr<TokenBucket> throttle)
    : base_url_(std::move(base_url)),
      model_name_(std::move(model_name)),
      transport_(std::move(transport)),
      max_retries_(max_retries),
      throttle_(std::move(throttle)) {}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) {
  if (text.empty()) throw DataError("embed: empty text");
  const std::string key = require_api_key(kApiKeyEnv, kFallbackApiKeyEnv);
  json body{{"model", model_name_}, {"input", text}};
  const auto resp = post_with_retries(
      *transport_, base_url_ + "/embeddings", body.dump(),
      {{"Authorization", "Bearer " + key}}, max_retries_, throttle_.get());
  EmbeddingVector out;
  out.provider_tag = model_name_;
  try {
    const json j = json::parse(resp.body);
    out.values = j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::Malformed,
                        std::string("malformed embedding response: ") +
                            e.what());
  }
  if (expected_dim_ > 0 && out.dim() != expected_dim_)
    throw ProviderError(ProviderError::Kind::Malformed,
                        "embedding dimension " + std::to_string(out.dim()) +
                            " does not match expected " +
                            std::to_string(expected_dim_));
  return out;
}

struct CachedEmbedder::Impl {
  std::string path;
  std::mutex mu;
  std::unordered_map<std::string, std::vector<double>> entries;  // key -> vec
  bool dirty = false;
};

CachedEmbedder::CachedEmbedder(std::shared_ptr<Embedder> inner,
                               std::string cache_path)
    : impl_(std::make_unique<Impl>()), inner_(std::move(inner)) {
  impl_->path = std::move(cache_path);
  std::ifstream in(impl_->path);
  std::string line;
  while (in && std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      impl_->entries[j.at("key").get<std::string>()] =
          j.at("values").get<std::vector<double>>();
    } catch (const json::exception&) {
      // skip corrupt cache lines; they will be regenerated
    }
  }
}

CachedEmbedder::~CachedEmbedder() { flush(); }

EmbeddingVector CachedEmbedder::embed(const std::string& text) {
  const std::string key = inner_->provider_tag() + ":" + content_hash(text);
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->entries.find(key);
    if (it != impl_->entries.end()) {
      EmbeddingVector out;
      out.provider_tag = inner_->provider_tag();
      out.values = it->second;
      return out;
    }
  }
  EmbeddingVector fresh = inner_->embed(text);
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->entries[key] = fresh.values;
    impl_->dirty = true;
  }
  return fresh;
}

void CachedEmbedder::flush() {
  std::lock_guard<std::mutex> lock(impl_->mu);
  if (!impl_->dirty || impl_->path.empty()) return;
  std::ofstream out(impl_->path);
  for (const auto& [key, values] : impl_->entries)
    out << json{{"key", key}, {"values", values}}.dump() << "\n";
  impl_->dirty = false;
}

BatchResult embed_batch(const std::vector<std::string>& texts,
                        Embedder& embedder, int parallelism) {
  if (parallelism < 1) throw UsageError("parallelism must be positive");
  BatchResult result;
  result.vectors.resize(texts.size());
  std::mutex failures_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= texts.size()) return;
      try {
        result.vectors[i] = embedder.embed(texts[i]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mu);
        result.failures.push_back({static_cast<int>(i), e.what()});
      }
    }
  };

  const int n_threads =
      std::min<std::size_t>(parallelism, std::max<std::size_t>(texts.size(), 1));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::sort(result.failures.begin(), result.failures.end(),
            [](const BatchFailure& a, const BatchFailure& b) {
              return a.index < b.index;
            });
  return result;
}

}  // namespace lrexplain
