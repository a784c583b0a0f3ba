#pragma once

#include <span>
#include <vector>

#include "modfuse/model.hpp"

namespace modfuse {

struct TrainConfig {
    int max_iters = 200;
    double tolerance = 1e-4;   // absolute log-likelihood improvement
    double pseudocount = 1e-6; // added to every count cell in the M-step
};

struct TrainResult {
    ModelParameters params;
    std::vector<double> log_likelihood_trace;  // one total log-likelihood per iteration
};

// Row-normalized (counts + pseudocount). A row whose raw counts sum to zero
// keeps the corresponding row of `previous`.
ModelParameters m_step(const SufficientStatistics& stats, const ModelParameters& previous,
                       double pseudocount);

// Multi-sequence Baum-Welch: all sequences share one parameter set.
TrainResult baum_welch(std::span<const ObservationSequence> sequences,
                       const ModelParameters& init, const TrainConfig& config = {});

}  // namespace modfuse
