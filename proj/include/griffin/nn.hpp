// Dense double-precision building blocks with hand-written backward passes:
// linear layers, two-layer SiLU MLPs, non-affine layer norm.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace griffin {

using Vec = std::vector<double>;

// Row-major matrix.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
    std::size_t size() const { return data.size(); }
};

// A tensor with its gradient accumulator.
struct Param {
    Mat value;
    Mat grad;

    Param() = default;
    Param(int rows, int cols) : value(rows, cols), grad(rows, cols) {}
    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

// y = W x + b, W is out_dim x in_dim.
struct Linear {
    Param weight;
    Param bias;

    Linear() = default;
    Linear(int in_dim, int out_dim) : weight(out_dim, in_dim), bias(1, out_dim) {}

    int in_dim() const { return weight.value.cols; }
    int out_dim() const { return weight.value.rows; }

    void init_xavier(std::mt19937_64& rng);
    void init_zero();

    Vec forward(const Vec& x) const;
    // Accumulates dW/db from (x, gy) and returns dx.
    Vec backward(const Vec& x, const Vec& gy);
};

// fc1 -> SiLU -> fc2. forward() returns the output and fills `hidden_pre`
// (fc1 pre-activations) which backward() needs.
struct Mlp {
    Linear fc1;
    Linear fc2;

    Mlp() = default;
    Mlp(int in_dim, int hidden, int out_dim) : fc1(in_dim, hidden), fc2(hidden, out_dim) {}

    void init_xavier(std::mt19937_64& rng);

    Vec forward(const Vec& x, Vec* hidden_pre) const;
    Vec backward(const Vec& x, const Vec& hidden_pre, const Vec& gy);
};

// LayerNorm without affine weights: y = (x - mean) / sqrt(var + eps), biased var.
inline constexpr double kLayerNormEps = 1e-8;
Vec layer_norm(const Vec& x);
// Backward given the *input* x and upstream gy.
Vec layer_norm_backward(const Vec& x, const Vec& gy);

double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& a);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha * x

}  // namespace griffin
