#pragma once

#include <span>

namespace arc::training {

/// Step-decay learning rate with plateau cuts.
struct Schedule {
    double base_lr = 0.001;
    double decay_a = 0.96;  ///< per epoch up to switch_epoch
    double decay_b = 0.75;  ///< per epoch after switch_epoch
    int switch_epoch = 20;
    double plateau_factor = 0.1;
    int plateau_patience = 5;
    double plateau_min_delta = 1e-4;
};

/// Number of plateau events in a validation-loss history: an event fires when
/// the best loss has not improved by more than min_delta for `patience`
/// consecutive epochs, after which the count restarts.
int plateau_events(std::span<const double> val_history, const Schedule& s);

/// base * a^min(e, switch) * b^max(0, e - switch) * factor^events.
double lr_at(int epoch, const Schedule& s, int plateau_events);
/// Same, with the events counted from the validation history so far.
double lr_at(int epoch, const Schedule& s, std::span<const double> val_history);

}  // namespace arc::training
