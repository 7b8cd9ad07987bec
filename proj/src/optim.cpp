#include "griffin/optim.hpp"

#include <cmath>

namespace griffin {

void AdamW::attach(std::vector<Param*> params) {
    params_ = std::move(params);
    m_.clear();
    v_.clear();
    for (const Param* p : params_) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
    }
    t_ = 0;
}

void AdamW::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Param* p = params_[k];
        Vec& m = m_[k];
        Vec& v = v_[k];
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            double& w = p->value.data[i];
            w -= lr * weight_decay * w;  // decoupled decay
            w -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

bool EarlyStopping::update(double metric, const std::vector<Param*>& params) {
    const bool improved = !seen_ || (minimize ? metric < best_ : metric > best_);
    if (improved) {
        seen_ = true;
        best_ = metric;
        stale_ = 0;
        snapshot_.clear();
        snapshot_.reserve(params.size());
        for (const Param* p : params) snapshot_.push_back(p->value.data);
    } else {
        ++stale_;
    }
    return improved;
}

void EarlyStopping::restore_best(const std::vector<Param*>& params) const {
    if (snapshot_.size() != params.size()) return;
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i]->value.data = snapshot_[i];
    }
}

}  // namespace griffin
