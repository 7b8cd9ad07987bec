// Pretrained scalar<->vector codec: ENC maps a normalized float to a d-vector
// (non-affine layer norm on the output), DEC maps back. Trained on standard
// normal draws with L1 loss, then frozen.
#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "griffin/embedding.hpp"
#include "griffin/nn.hpp"
#include "griffin/quantile.hpp"

namespace griffin {

struct CodecPretrainConfig {
    int d = 64;
    int hidden = 64;
    long steps = 4000;
    int batch_size = 256;
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    double tolerance = 0.05;  // held-out mean |roundtrip(x) - x| bound
    int holdout_size = 10000;
};

class FloatCodec {
public:
    FloatCodec() = default;
    FloatCodec(int d, int hidden);

    int dimension() const { return d_; }
    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    // ENC(x): 1 -> hidden -> hidden -> d with SiLU, layer-normed output.
    Vec encode(double x) const;
    // DEC(w): d -> hidden -> hidden -> 1 with SiLU.
    double decode(const Vec& w) const;
    double roundtrip(double x) const { return decode(encode(x)); }

    // dL/dw for frozen decoding (gradient flows through DEC to its input; the
    // decoder parameters themselves stay fixed).
    Vec decode_input_grad(const Vec& w, double gy) const;

    // Trainable parameter list; empty once frozen.
    std::vector<Param*> parameters();

    friend FloatCodec pretrain_float_codec(const CodecPretrainConfig& cfg);
    friend void write_codec(std::ostream&, const FloatCodec&,
                            const std::unordered_map<std::string, QuantileNormalizer>&);
    friend std::pair<FloatCodec, std::unordered_map<std::string, QuantileNormalizer>> read_codec(
        std::istream&);

private:
    int d_ = 0;
    int hidden_ = 0;
    bool frozen_ = false;
    Linear enc1_, enc2_, enc3_;
    Linear dec1_, dec2_, dec3_;
};

// Trains ENC/DEC on x ~ N(0,1) minimizing |DEC(ENC(x)) - x|, freezes the
// result. Throws NonConvergence if the held-out MAE on draws restricted to
// [-3, 3] exceeds cfg.tolerance.
FloatCodec pretrain_float_codec(const CodecPretrainConfig& cfg);

// Mean |roundtrip(x) - x| over n standard-normal draws restricted to [-3, 3].
double codec_holdout_mae(const FloatCodec& codec, int n, std::uint64_t seed);

// ENC(transform(raw)); throws NotFitted when the normalizer is not fitted.
Vec encode_numerical(const FloatCodec& codec, const QuantileNormalizer& normalizer, double raw);

// Coarse calendar text of an epoch-seconds timestamp: "year Y month MM weekday W"
// (weekday 0 = Sunday).
std::string timestamp_description(std::int64_t epoch_seconds);

// embed_text(calendar description) + ENC(column-normalized epoch value).
Vec encode_timestamp(const EmbeddingProvider& provider, const FloatCodec& codec,
                     const QuantileNormalizer& normalizer, std::int64_t epoch_seconds);

// Codec checkpoint: versioned binary of ENC/DEC weights plus any fitted
// per-column normalizer reference arrays. The stream variants embed the same
// layout inside larger checkpoint files.
void write_codec(std::ostream& out, const FloatCodec& codec,
                 const std::unordered_map<std::string, QuantileNormalizer>& normalizers);
std::pair<FloatCodec, std::unordered_map<std::string, QuantileNormalizer>> read_codec(
    std::istream& in);
void save_codec(const FloatCodec& codec,
                const std::unordered_map<std::string, QuantileNormalizer>& normalizers,
                const std::string& path);
std::pair<FloatCodec, std::unordered_map<std::string, QuantileNormalizer>> load_codec(
    const std::string& path);

}  // namespace griffin
