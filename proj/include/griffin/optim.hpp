// AdamW with decoupled weight decay, and a patience-based early stopper that
// snapshots the best parameters.
#pragma once

#include <cstdint>
#include <vector>

#include "griffin/nn.hpp"

namespace griffin {

struct AdamW {
    double lr = 3e-4;
    double weight_decay = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void attach(std::vector<Param*> params);
    void zero_grad();
    void step();

private:
    std::vector<Param*> params_;
    std::vector<Vec> m_;
    std::vector<Vec> v_;
    long t_ = 0;
};

// Tracks the best validation metric; keeps a copy of the best parameters so
// training can roll back after patience runs out.
struct EarlyStopping {
    int patience = 10;
    bool minimize = true;

    // Returns true when `metric` improves on the best seen so far.
    bool update(double metric, const std::vector<Param*>& params);
    bool should_stop() const { return stale_ >= patience; }
    double best_metric() const { return best_; }
    bool has_snapshot() const { return !snapshot_.empty(); }
    void restore_best(const std::vector<Param*>& params) const;

private:
    double best_ = 0.0;
    bool seen_ = false;
    int stale_ = 0;
    std::vector<Vec> snapshot_;
};

}  // namespace griffin
