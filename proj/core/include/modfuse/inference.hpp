#pragma once

#include <span>
#include <vector>

#include "modfuse/model.hpp"

namespace modfuse {

// Log-probability of one week's per-source cells given the hidden state.
// Missing channels marginalize out (factor 1). -inf when some observed
// channel has emission probability 0.
double emission_log_factor(const ModelParameters& params, std::span<const std::int8_t> row,
                           int state);

struct ForwardBackwardResult {
    std::vector<Vec3> posterior;              // T rows, each sums to 1
    std::vector<Mat3> transition_posterior;   // T-1 matrices, each sums to 1
    double log_likelihood = 0.0;
};

// Smoothed marginals via log-space forward-backward. Throws NumericalError
// naming the first week at which every state path has probability 0.
ForwardBackwardResult forward_backward(const ModelParameters& params,
                                       const ObservationSequence& seq);

struct ViterbiResult {
    std::vector<int> path;
    double log_probability = 0.0;
};

// Most probable joint path; ties prefer the lower state index at every
// backtrack step.
ViterbiResult viterbi(const ModelParameters& params, const ObservationSequence& seq);

SufficientStatistics accumulate_statistics(const ModelParameters& params,
                                           const ObservationSequence& seq);

double sequence_log_likelihood(const ModelParameters& params, const ObservationSequence& seq);

}  // namespace modfuse
