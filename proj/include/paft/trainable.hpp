#pragma once

#include <string>
#include <vector>

#include "paft/task.hpp"

namespace paft {

/// Contract the training loop drives. Implementations own their parameters
/// and optimizer; train_step applies exactly one update over one batch and
/// returns the batch loss.
class TrainableModel {
public:
    virtual ~TrainableModel() = default;

    virtual double train_step(const std::vector<RenderedExample>& batch,
                              double learning_rate) = 0;
    virtual std::string predict_label(const RenderedExample& ex) const = 0;

    /// Stable content hash of the parameter state (hex string).
    virtual std::string param_digest() const = 0;
};

} // namespace paft
