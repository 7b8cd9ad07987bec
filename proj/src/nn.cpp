#include "griffin/nn.hpp"

#include <cassert>

namespace griffin {

void Linear::init_xavier(std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / (in_dim() + out_dim()));
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& w : weight.value.data) w = dist(rng);
    std::fill(bias.value.data.begin(), bias.value.data.end(), 0.0);
}

void Linear::init_zero() {
    std::fill(weight.value.data.begin(), weight.value.data.end(), 0.0);
    std::fill(bias.value.data.begin(), bias.value.data.end(), 0.0);
}

Vec Linear::forward(const Vec& x) const {
    assert(static_cast<int>(x.size()) == in_dim());
    Vec y(out_dim());
    for (int o = 0; o < out_dim(); ++o) {
        const double* w = weight.value.row(o);
        double acc = bias.value.data[o];
        for (int i = 0; i < in_dim(); ++i) acc += w[i] * x[i];
        y[o] = acc;
    }
    return y;
}

Vec Linear::backward(const Vec& x, const Vec& gy) {
    assert(static_cast<int>(gy.size()) == out_dim());
    Vec gx(in_dim(), 0.0);
    for (int o = 0; o < out_dim(); ++o) {
        const double g = gy[o];
        double* gw = weight.grad.row(o);
        const double* w = weight.value.row(o);
        for (int i = 0; i < in_dim(); ++i) {
            gw[i] += g * x[i];
            gx[i] += g * w[i];
        }
        bias.grad.data[o] += g;
    }
    return gx;
}

void Mlp::init_xavier(std::mt19937_64& rng) {
    fc1.init_xavier(rng);
    fc2.init_xavier(rng);
}

Vec Mlp::forward(const Vec& x, Vec* hidden_pre) const {
    Vec h = fc1.forward(x);
    if (hidden_pre) *hidden_pre = h;
    for (double& v : h) v = silu(v);
    return fc2.forward(h);
}

Vec Mlp::backward(const Vec& x, const Vec& hidden_pre, const Vec& gy) {
    Vec h(hidden_pre.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = silu(hidden_pre[i]);
    Vec gh = fc2.backward(h, gy);
    for (std::size_t i = 0; i < gh.size(); ++i) gh[i] *= silu_grad(hidden_pre[i]);
    return fc1.backward(x, gh);
}

Vec layer_norm(const Vec& x) {
    const int n = static_cast<int>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = (x[i] - mean) * inv_std;
    return y;
}

Vec layer_norm_backward(const Vec& x, const Vec& gy) {
    const int n = static_cast<int>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

    // y_i = (x_i - mean) * inv_std
    double g_sum = 0.0;
    double g_dot_y = 0.0;
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = (x[i] - mean) * inv_std;
        g_sum += gy[i];
        g_dot_y += gy[i] * y[i];
    }
    Vec gx(n);
    for (int i = 0; i < n; ++i) {
        gx[i] = inv_std * (gy[i] - g_sum / n - y[i] * g_dot_y / n);
    }
    return gx;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l2_norm(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace griffin
