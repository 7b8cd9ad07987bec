#include "griffin/float_codec.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "griffin/binio.hpp"
#include "griffin/common.hpp"
#include "griffin/optim.hpp"

namespace griffin {

FloatCodec::FloatCodec(int d, int hidden)
    : d_(d),
      hidden_(hidden),
      enc1_(1, hidden),
      enc2_(hidden, hidden),
      enc3_(hidden, d),
      dec1_(d, hidden),
      dec2_(hidden, hidden),
      dec3_(hidden, 1) {}

namespace {

Vec silu_all(Vec v) {
    for (double& x : v) x = silu(x);
    return v;
}

}  // namespace

Vec FloatCodec::encode(double x) const {
    const Vec h1 = silu_all(enc1_.forward(Vec{x}));
    const Vec h2 = silu_all(enc2_.forward(h1));
    return layer_norm(enc3_.forward(h2));
}

double FloatCodec::decode(const Vec& w) const {
    if (static_cast<int>(w.size()) != d_) {
        throw DimensionMismatch("decode expects dimension " + std::to_string(d_) + ", got " +
                                std::to_string(w.size()));
    }
    const Vec h1 = silu_all(dec1_.forward(w));
    const Vec h2 = silu_all(dec2_.forward(h1));
    return dec3_.forward(h2)[0];
}

Vec FloatCodec::decode_input_grad(const Vec& w, double gy) const {
    const Vec a1 = dec1_.forward(w);
    const Vec h1 = silu_all(a1);
    const Vec a2 = dec2_.forward(h1);
    const Vec h2 = silu_all(a2);

    // Walk back through the three linears without touching their grads.
    Vec gh2(hidden_, 0.0);
    for (int i = 0; i < hidden_; ++i) gh2[i] = gy * dec3_.weight.value.at(0, i);
    Vec ga2(hidden_);
    for (int i = 0; i < hidden_; ++i) ga2[i] = gh2[i] * silu_grad(a2[i]);
    Vec gh1(hidden_, 0.0);
    for (int o = 0; o < hidden_; ++o) {
        const double* row = dec2_.weight.value.row(o);
        for (int i = 0; i < hidden_; ++i) gh1[i] += ga2[o] * row[i];
    }
    Vec ga1(hidden_);
    for (int i = 0; i < hidden_; ++i) ga1[i] = gh1[i] * silu_grad(a1[i]);
    Vec gw(d_, 0.0);
    for (int o = 0; o < hidden_; ++o) {
        const double* row = dec1_.weight.value.row(o);
        for (int i = 0; i < d_; ++i) gw[i] += ga1[o] * row[i];
    }
    return gw;
}

std::vector<Param*> FloatCodec::parameters() {
    if (frozen_) return {};
    return {&enc1_.weight, &enc1_.bias, &enc2_.weight, &enc2_.bias, &enc3_.weight, &enc3_.bias,
            &dec1_.weight, &dec1_.bias, &dec2_.weight, &dec2_.bias, &dec3_.weight, &dec3_.bias};
}

FloatCodec pretrain_float_codec(const CodecPretrainConfig& cfg) {
    FloatCodec codec(cfg.d, cfg.hidden);
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x0c0dec));
    codec.enc1_.init_xavier(rng);
    codec.enc2_.init_xavier(rng);
    codec.enc3_.init_xavier(rng);
    codec.dec1_.init_xavier(rng);
    codec.dec2_.init_xavier(rng);
    codec.dec3_.init_xavier(rng);

    AdamW opt;
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;
    opt.attach(codec.parameters());

    std::normal_distribution<double> normal(0.0, 1.0);
    for (long step = 0; step < cfg.steps; ++step) {
        opt.zero_grad();
        for (int b = 0; b < cfg.batch_size; ++b) {
            const double x = normal(rng);

            // forward with caches
            const Vec ea1 = codec.enc1_.forward(Vec{x});
            const Vec eh1 = silu_all(ea1);
            const Vec ea2 = codec.enc2_.forward(eh1);
            const Vec eh2 = silu_all(ea2);
            const Vec pre_ln = codec.enc3_.forward(eh2);
            const Vec w = layer_norm(pre_ln);
            const Vec da1 = codec.dec1_.forward(w);
            const Vec dh1 = silu_all(da1);
            const Vec da2 = codec.dec2_.forward(dh1);
            const Vec dh2 = silu_all(da2);
            const double y = codec.dec3_.forward(dh2)[0];

            // L1 loss, averaged over the batch
            const double gy = (y > x ? 1.0 : (y < x ? -1.0 : 0.0)) / cfg.batch_size;

            Vec gdh2 = codec.dec3_.backward(dh2, Vec{gy});
            for (int i = 0; i < cfg.hidden; ++i) gdh2[i] *= silu_grad(da2[i]);
            Vec gdh1 = codec.dec2_.backward(dh1, gdh2);
            for (int i = 0; i < cfg.hidden; ++i) gdh1[i] *= silu_grad(da1[i]);
            Vec gw = codec.dec1_.backward(w, gdh1);
            Vec gpre = layer_norm_backward(pre_ln, gw);
            Vec geh2 = codec.enc3_.backward(eh2, gpre);
            for (int i = 0; i < cfg.hidden; ++i) geh2[i] *= silu_grad(ea2[i]);
            Vec geh1 = codec.enc2_.backward(eh1, geh2);
            for (int i = 0; i < cfg.hidden; ++i) geh1[i] *= silu_grad(ea1[i]);
            codec.enc1_.backward(Vec{x}, geh1);
        }
        opt.step();
    }

    codec.freeze();
    const double mae = codec_holdout_mae(codec, cfg.holdout_size, mix_seed(cfg.seed, 0x401d011));
    if (mae > cfg.tolerance) {
        throw NonConvergence("codec held-out MAE " + std::to_string(mae) + " exceeds tolerance " +
                             std::to_string(cfg.tolerance));
    }
    return codec;
}

double codec_holdout_mae(const FloatCodec& codec, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = normal(rng);
        while (x < -3.0 || x > 3.0) x = normal(rng);
        total += std::abs(codec.roundtrip(x) - x);
    }
    return total / n;
}

Vec encode_numerical(const FloatCodec& codec, const QuantileNormalizer& normalizer, double raw) {
    if (!normalizer.fitted()) throw NotFitted("encode_numerical: normalizer not fitted");
    return codec.encode(normalizer.transform(raw));
}

std::string timestamp_description(std::int64_t epoch_seconds) {
    // Civil-from-days (Hinnant); weekday 0 = Sunday (1970-01-01 was a Thursday).
    std::int64_t days = epoch_seconds / 86400;
    if (epoch_seconds % 86400 < 0) --days;
    const int weekday = static_cast<int>(((days % 7) + 7 + 4) % 7);

    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t year = m <= 2 ? y + 1 : y;

    char buf[64];
    std::snprintf(buf, sizeof(buf), "year %lld month %02lld weekday %d",
                  static_cast<long long>(year), static_cast<long long>(m), weekday);
    return buf;
}

Vec encode_timestamp(const EmbeddingProvider& provider, const FloatCodec& codec,
                     const QuantileNormalizer& normalizer, std::int64_t epoch_seconds) {
    Vec text_part = provider.embed(timestamp_description(epoch_seconds));
    const Vec num_part = encode_numerical(codec, normalizer, static_cast<double>(epoch_seconds));
    axpy(1.0, num_part, text_part);
    return text_part;
}

// ---------------------------------------------------------------------------
// Codec checkpoint

namespace {
constexpr char kCodecMagic[4] = {'G', 'R', 'F', 'C'};
constexpr std::uint32_t kCodecVersion = 1;

void put_linear(std::ostream& out, const Linear& lin) {
    binio::put_u32(out, static_cast<std::uint32_t>(lin.in_dim()));
    binio::put_u32(out, static_cast<std::uint32_t>(lin.out_dim()));
    binio::put_f64_array(out, lin.weight.value.data);
    binio::put_f64_array(out, lin.bias.value.data);
}

Linear get_linear(std::istream& in) {
    const int in_dim = static_cast<int>(binio::get_u32(in));
    const int out_dim = static_cast<int>(binio::get_u32(in));
    Linear lin(in_dim, out_dim);
    lin.weight.value.data = binio::get_f64_array(in);
    lin.bias.value.data = binio::get_f64_array(in);
    return lin;
}
}  // namespace

void write_codec(std::ostream& out, const FloatCodec& codec,
                 const std::unordered_map<std::string, QuantileNormalizer>& normalizers) {
    out.write(kCodecMagic, 4);
    binio::put_u32(out, kCodecVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(codec.d_));
    binio::put_u32(out, static_cast<std::uint32_t>(codec.hidden_));
    put_linear(out, codec.enc1_);
    put_linear(out, codec.enc2_);
    put_linear(out, codec.enc3_);
    put_linear(out, codec.dec1_);
    put_linear(out, codec.dec2_);
    put_linear(out, codec.dec3_);
    binio::put_u32(out, static_cast<std::uint32_t>(normalizers.size()));
    for (const auto& [key, qn] : normalizers) {
        binio::put_string(out, key);
        binio::put_f64_array(out, qn.references());
    }
}

std::pair<FloatCodec, std::unordered_map<std::string, QuantileNormalizer>> read_codec(
    std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCodecMagic, 4) != 0) {
        throw ParseError("stream does not hold a codec checkpoint");
    }
    const std::uint32_t version = binio::get_u32(in);
    if (version != kCodecVersion) {
        throw ParseError("unsupported codec checkpoint version " + std::to_string(version));
    }
    FloatCodec codec;
    codec.d_ = static_cast<int>(binio::get_u32(in));
    codec.hidden_ = static_cast<int>(binio::get_u32(in));
    codec.enc1_ = get_linear(in);
    codec.enc2_ = get_linear(in);
    codec.enc3_ = get_linear(in);
    codec.dec1_ = get_linear(in);
    codec.dec2_ = get_linear(in);
    codec.dec3_ = get_linear(in);
    codec.frozen_ = true;
    std::unordered_map<std::string, QuantileNormalizer> normalizers;
    const std::uint32_t count = binio::get_u32(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string key = binio::get_string(in);
        normalizers.emplace(key, QuantileNormalizer::from_references(binio::get_f64_array(in)));
    }
    if (!in) throw ParseError("truncated codec checkpoint");
    return {std::move(codec), std::move(normalizers)};
}

void save_codec(const FloatCodec& codec,
                const std::unordered_map<std::string, QuantileNormalizer>& normalizers,
                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write codec checkpoint: " + path);
    write_codec(out, codec, normalizers);
    if (!out) throw IoError("write failed: " + path);
}

std::pair<FloatCodec, std::unordered_map<std::string, QuantileNormalizer>> load_codec(
    const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open codec checkpoint: " + path);
    try {
        return read_codec(in);
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " (" + path + ")");
    }
}

}  // namespace griffin
