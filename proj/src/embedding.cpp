#include "griffin/embedding.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "griffin/common.hpp"

namespace griffin {

std::shared_ptr<EmbeddingProvider> EmbeddingProvider::stub(int dimension) {
    return std::shared_ptr<EmbeddingProvider>(
        new EmbeddingProvider(dimension, EmbeddingMode::deterministic_stub));
}

std::shared_ptr<EmbeddingProvider> EmbeddingProvider::external(int dimension,
                                                               ExternalEmbeddingConfig cfg) {
    auto provider = std::shared_ptr<EmbeddingProvider>(
        new EmbeddingProvider(dimension, EmbeddingMode::external_service));
    provider->external_ = std::move(cfg);
    return provider;
}

std::shared_ptr<EmbeddingProvider> EmbeddingProvider::from_env(int dimension) {
    const char* endpoint = std::getenv("GRIFFIN_EMBED_ENDPOINT");
    if (endpoint == nullptr || *endpoint == '\0') {
        return stub(dimension);
    }
    ExternalEmbeddingConfig cfg;
    cfg.endpoint = endpoint;
    if (const char* token = std::getenv("GRIFFIN_EMBED_TOKEN")) cfg.auth_token = token;
    return external(dimension, cfg);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Vec EmbeddingProvider::compute_stub(const std::string& text) const {
    // Hashed token bag: each token lands on 4 signed coordinates.
    Vec v(dimension_, 0.0);
    std::string token;
    auto flush_token = [&] {
        if (token.empty()) return;
        std::uint64_t h = fnv1a(token);
        for (int k = 0; k < 4; ++k) {
            h = splitmix64(h);
            const int coord = static_cast<int>(h % static_cast<std::uint64_t>(dimension_));
            const double sign = (h >> 63) ? 1.0 : -1.0;
            v[coord] += sign;
        }
        token.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            token.push_back(c);
        } else {
            flush_token();
        }
    }
    flush_token();

    const double norm = l2_norm(v);
    if (norm < 1e-12) {
        // No alphanumeric tokens or full cancellation: fall back to a unit
        // vector derived from the raw string.
        std::fill(v.begin(), v.end(), 0.0);
        v[fnv1a(text) % static_cast<std::uint64_t>(dimension_)] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

Vec EmbeddingProvider::embed(const std::string& text) const {
    if (trim(text).empty()) {
        throw EmptyText("cannot embed empty text");
    }
    {
        std::shared_lock lock(cache_mutex_);
        const auto it = cache_.find(text);
        if (it != cache_.end()) return it->second;
    }
    Vec v;
    if (mode_ == EmbeddingMode::deterministic_stub) {
        v = compute_stub(text);
    } else {
        v = fetch_external({text}).front();
    }
    {
        std::unique_lock lock(cache_mutex_);
        cache_.emplace(text, v);
    }
    return v;
}

std::vector<Vec> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) const {
    std::vector<Vec> out(texts.size());
    if (mode_ == EmbeddingMode::deterministic_stub) {
        for (std::size_t i = 0; i < texts.size(); ++i) out[i] = embed(texts[i]);
        return out;
    }

    // External mode: resolve cache hits first, then fetch misses in batches.
    std::vector<std::size_t> missing;
    {
        std::shared_lock lock(cache_mutex_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (trim(texts[i]).empty()) throw EmptyText("cannot embed empty text");
            const auto it = cache_.find(texts[i]);
            if (it != cache_.end()) {
                out[i] = it->second;
            } else {
                missing.push_back(i);
            }
        }
    }
    for (std::size_t start = 0; start < missing.size();
         start += static_cast<std::size_t>(external_.batch_size)) {
        const std::size_t end =
            std::min(missing.size(), start + static_cast<std::size_t>(external_.batch_size));
        std::vector<std::string> chunk;
        for (std::size_t i = start; i < end; ++i) chunk.push_back(texts[missing[i]]);
        std::vector<Vec> vectors = fetch_external(chunk);
        std::unique_lock lock(cache_mutex_);
        for (std::size_t i = start; i < end; ++i) {
            out[missing[i]] = vectors[i - start];
            cache_.emplace(texts[missing[i]], std::move(vectors[i - start]));
        }
    }
    return out;
}

std::vector<Vec> EmbeddingProvider::fetch_external(const std::vector<std::string>& texts) const {
    nlohmann::json request;
    request["texts"] = texts;
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= external_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(external_.backoff_ms * (1 << (attempt - 1))));
        }
        httplib::Client client(external_.endpoint);
        httplib::Headers headers;
        if (!external_.auth_token.empty()) {
            headers.emplace("Authorization", "Bearer " + external_.auth_token);
        }
        auto res = client.Post("/embed", headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        try {
            const nlohmann::json doc = nlohmann::json::parse(res->body);
            std::vector<Vec> vectors;
            for (const auto& jv : doc.at("vectors")) {
                Vec v = jv.get<Vec>();
                if (static_cast<int>(v.size()) != dimension_) {
                    throw ServiceError("embedding service returned dimension " +
                                       std::to_string(v.size()) + ", expected " +
                                       std::to_string(dimension_));
                }
                vectors.push_back(std::move(v));
            }
            if (vectors.size() != texts.size()) {
                throw ServiceError("embedding service returned " + std::to_string(vectors.size()) +
                                   " vectors for " + std::to_string(texts.size()) + " texts");
            }
            return vectors;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("bad response body: ") + e.what();
        }
    }
    throw ServiceError("embedding service failed after " + std::to_string(external_.max_retries + 1) +
                       " attempts: " + last_error);
}

Vec encode_categorical(const EmbeddingProvider& provider, const std::string& column_name,
                       const std::string& value) {
    if (trim(value).empty()) {
        throw EmptyText("empty categorical value for column " + column_name);
    }
    return provider.embed(column_name + " is " + value);
}

}  // namespace griffin
