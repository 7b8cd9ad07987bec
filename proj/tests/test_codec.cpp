#include <doctest.h>

#include <cmath>
#include <random>

#include "griffin/common.hpp"
#include "griffin/float_codec.hpp"
#include "helpers.hpp"

using namespace griffin;

namespace {

// One codec shared across the assertions below; pretraining is the slow part.
const FloatCodec& shared_codec() {
    static FloatCodec codec = [] {
        CodecPretrainConfig cfg;
        cfg.d = 32;
        cfg.hidden = 64;
        cfg.steps = 3000;
        cfg.batch_size = 64;
        cfg.seed = 1234;
        return pretrain_float_codec(cfg);
    }();
    return codec;
}

}  // namespace

TEST_CASE("pretrained codec round-trips the center of the distribution") {
    const FloatCodec& codec = shared_codec();
    CHECK(std::abs(codec.roundtrip(0.0) - 0.0) <= 0.05);
}

TEST_CASE("held-out mean round-trip error is within tolerance") {
    const FloatCodec& codec = shared_codec();
    const double mae = codec_holdout_mae(codec, 10000, 999);
    CHECK(mae <= 0.05);
}

TEST_CASE("encoder output is layer-normed: mean 0, variance 1") {
    const FloatCodec& codec = shared_codec();
    for (double x : {-2.5, -1.0, 0.0, 0.3, 2.9}) {
        const Vec w = codec.encode(x);
        double mean = 0.0;
        for (double v : w) mean += v;
        mean /= w.size();
        double var = 0.0;
        for (double v : w) var += (v - mean) * (v - mean);
        var /= w.size();
        CHECK(std::abs(mean) <= 1e-9);
        CHECK(std::abs(var - 1.0) <= 1e-4);
    }
}

TEST_CASE("frozen codec exposes no trainable parameters") {
    FloatCodec codec = shared_codec();
    CHECK(codec.frozen());
    CHECK(codec.parameters().empty());
}

TEST_CASE("an impossible budget raises NonConvergence") {
    CodecPretrainConfig cfg;
    cfg.d = 16;
    cfg.hidden = 8;
    cfg.steps = 1;
    cfg.batch_size = 4;
    cfg.holdout_size = 500;
    cfg.seed = 3;
    CHECK_THROWS_AS(pretrain_float_codec(cfg), NonConvergence);
}

TEST_CASE("decode_input_grad matches finite differences") {
    const FloatCodec& codec = shared_codec();
    std::mt19937_64 rng(55);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec w(codec.dimension());
    for (double& v : w) v = dist(rng);

    const double gy = 1.7;
    const Vec grad = codec.decode_input_grad(w, gy);
    const double h = 1e-6;
    for (int i = 0; i < codec.dimension(); i += 5) {
        Vec wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = gy * (codec.decode(wp) - codec.decode(wm)) / (2 * h);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("encode_numerical composes normalizer and encoder") {
    const FloatCodec& codec = shared_codec();
    std::vector<double> values;
    for (int i = 1; i <= 999; ++i) values.push_back(i * 0.5);
    const QuantileNormalizer qn = QuantileNormalizer::fit(values);

    // median -> ENC(0) (transform of the median is ~0)
    const double median = values[values.size() / 2];
    const Vec at_median = encode_numerical(codec, qn, median);
    const Vec enc_zero = codec.encode(qn.transform(median));
    CHECK(at_median == enc_zero);

    // decoded outputs are monotone within round-trip tolerance on a grid
    double prev = -HUGE_VAL;
    for (int i = 0; i < 100; ++i) {
        const double raw = 1.0 + i * (499.0 - 1.0) / 99.0;
        const double decoded = codec.decode(encode_numerical(codec, qn, raw));
        CHECK(decoded >= prev - 0.15);
        prev = std::max(prev, decoded);
    }

    const QuantileNormalizer unfitted;
    CHECK_THROWS_AS(encode_numerical(codec, unfitted, 1.0), NotFitted);
}

TEST_CASE("timestamp description uses the documented calendar template") {
    CHECK(timestamp_description(1710460800) == "year 2024 month 03 weekday 5");
    CHECK(timestamp_description(0) == "year 1970 month 01 weekday 4");
    CHECK(timestamp_description(86399) == "year 1970 month 01 weekday 4");
    CHECK(timestamp_description(-86400) == "year 1969 month 12 weekday 3");
    CHECK(timestamp_description(1700000000) == "year 2023 month 11 weekday 2");
}

TEST_CASE("timestamp encoding = calendar text part + normalized numeric part") {
    const FloatCodec& codec = shared_codec();
    auto provider = EmbeddingProvider::stub(codec.dimension());

    std::vector<double> epochs;
    for (int i = 0; i < 501; ++i) epochs.push_back(1700000000.0 + i * 3600.0);
    const QuantileNormalizer qn = QuantileNormalizer::fit(epochs);

    const std::int64_t t1 = 1700000000;         // 22:13 UTC
    const std::int64_t t2 = 1700000000 + 3600;  // 23:13 UTC, same calendar day
    const Vec e1 = encode_timestamp(*provider, codec, qn, t1);
    const Vec e2 = encode_timestamp(*provider, codec, qn, t2);

    // additivity: result equals the sum of independently computed parts
    Vec expected = provider->embed(timestamp_description(t1));
    axpy(1.0, encode_numerical(codec, qn, static_cast<double>(t1)), expected);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(e1[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }

    // same calendar day: the difference is purely the numeric component
    const Vec n1 = encode_numerical(codec, qn, static_cast<double>(t1));
    const Vec n2 = encode_numerical(codec, qn, static_cast<double>(t2));
    for (std::size_t i = 0; i < e1.size(); ++i) {
        CHECK(e1[i] - e2[i] == doctest::Approx(n1[i] - n2[i]).epsilon(1e-9));
    }

    // median timestamp: numeric part ~ ENC(0)
    const double median_epoch = epochs[epochs.size() / 2];
    const Vec at_median =
        encode_timestamp(*provider, codec, qn, static_cast<std::int64_t>(median_epoch));
    Vec text_part = provider->embed(timestamp_description(static_cast<std::int64_t>(median_epoch)));
    const Vec num_part_expected = codec.encode(0.0);
    for (std::size_t i = 0; i < at_median.size(); ++i) {
        CHECK(at_median[i] - text_part[i] ==
              doctest::Approx(num_part_expected[i]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("codec checkpoint round trips weights and normalizers") {
    const FloatCodec& codec = shared_codec();
    testutil::TempDir dir("codec");
    std::unordered_map<std::string, QuantileNormalizer> normalizers;
    normalizers.emplace("shop/users.age", QuantileNormalizer::fit({1, 2, 3, 4, 5}));
    save_codec(codec, normalizers, dir.file("codec.bin"));

    auto [loaded, loaded_norms] = load_codec(dir.file("codec.bin"));
    CHECK(loaded.frozen());
    CHECK(loaded.dimension() == codec.dimension());
    for (double x : {-2.0, 0.0, 1.5}) {
        CHECK(loaded.roundtrip(x) == codec.roundtrip(x));
        CHECK(loaded.encode(x) == codec.encode(x));
    }
    REQUIRE(loaded_norms.count("shop/users.age") == 1);
    CHECK(loaded_norms.at("shop/users.age").references() ==
          normalizers.at("shop/users.age").references());
}
