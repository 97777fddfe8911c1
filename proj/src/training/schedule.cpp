#include "arc/training/schedule.hpp"

#include "arc/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arc::training {

int plateau_events(std::span<const double> val_history, const Schedule& s) {
    int events = 0, stale = 0;
    double best = std::numeric_limits<double>::infinity();
    for (const double loss : val_history) {
        if (loss < best - s.plateau_min_delta) {
            best = loss;
            stale = 0;
        } else if (++stale >= s.plateau_patience) {
            ++events;
            stale = 0;
        }
    }
    return events;
}

double lr_at(int epoch, const Schedule& s, int events) {
    if (epoch < 0) throw Error(ErrorCode::ConfigError, "epoch must be non-negative");
    double lr = s.base_lr * std::pow(s.decay_a, std::min(epoch, s.switch_epoch)) *
                std::pow(s.decay_b, std::max(0, epoch - s.switch_epoch));
    for (int i = 0; i < events; ++i) lr *= s.plateau_factor;
    return lr;
}

double lr_at(int epoch, const Schedule& s, std::span<const double> val_history) {
    return lr_at(epoch, s, plateau_events(val_history, s));
}

}  // namespace arc::training
