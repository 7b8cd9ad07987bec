// Text embedding provider: a deterministic hashed-token stub, or an external
// JSON-over-HTTP service. Vectors are cached; the cache supports concurrent
// readers with exclusive insertion.
#pragma once

#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "griffin/nn.hpp"

namespace griffin {

enum class EmbeddingMode { deterministic_stub, external_service };

struct ExternalEmbeddingConfig {
    std::string endpoint;  // scheme://host:port; requests POST to <endpoint>/embed
    std::string auth_token;
    int batch_size = 64;
    int max_retries = 3;
    int backoff_ms = 100;
};

class EmbeddingProvider {
public:
    static std::shared_ptr<EmbeddingProvider> stub(int dimension);
    static std::shared_ptr<EmbeddingProvider> external(int dimension, ExternalEmbeddingConfig cfg);
    // External mode when GRIFFIN_EMBED_ENDPOINT is set (token from
    // GRIFFIN_EMBED_TOKEN), stub otherwise.
    static std::shared_ptr<EmbeddingProvider> from_env(int dimension);

    int dimension() const { return dimension_; }
    EmbeddingMode mode() const { return mode_; }

    // Deterministic per text. Stub vectors are unit-norm; external vectors
    // pass through unchanged. Throws EmptyText when text trims to nothing.
    Vec embed(const std::string& text) const;
    std::vector<Vec> embed_batch(const std::vector<std::string>& texts) const;

private:
    EmbeddingProvider(int dimension, EmbeddingMode mode) : dimension_(dimension), mode_(mode) {}

    Vec compute_stub(const std::string& text) const;
    std::vector<Vec> fetch_external(const std::vector<std::string>& texts) const;

    int dimension_;
    EmbeddingMode mode_;
    ExternalEmbeddingConfig external_;

    mutable std::shared_mutex cache_mutex_;
    mutable std::unordered_map<std::string, Vec> cache_;
};

// Template of the categorical encoder: embed_text("<column name> is <value>").
Vec encode_categorical(const EmbeddingProvider& provider, const std::string& column_name,
                       const std::string& value);

}  // namespace griffin
