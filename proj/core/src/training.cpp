#include "modfuse/training.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "modfuse/errors.hpp"
#include "modfuse/inference.hpp"

namespace modfuse {

namespace {

Vec3 normalize_row(const Vec3& counts, const Vec3& previous, double pseudocount) {
    double raw = counts[0] + counts[1] + counts[2];
    if (raw <= 0.0) return previous;  // state never visited in expectation
    double total = raw + kNumStates * pseudocount;
    Vec3 out;
    for (int j = 0; j < kNumStates; ++j) out[j] = (counts[j] + pseudocount) / total;
    return out;
}

}  // namespace

ModelParameters m_step(const SufficientStatistics& stats, const ModelParameters& previous,
                       double pseudocount) {
    if (pseudocount < 0.0) throw InputError("pseudocount must be nonnegative");
    ModelParameters out = previous;
    out.initial = normalize_row(stats.start, previous.initial, pseudocount);
    for (int i = 0; i < kNumStates; ++i)
        out.transition[i] = normalize_row(stats.transition[i], previous.transition[i], pseudocount);
    for (size_t c = 0; c < stats.emissions.size(); ++c)
        for (int i = 0; i < kNumStates; ++i)
            out.emissions[c][i] =
                normalize_row(stats.emissions[c][i], previous.emissions[c][i], pseudocount);
    return out;
}

TrainResult baum_welch(std::span<const ObservationSequence> sequences,
                       const ModelParameters& init, const TrainConfig& config) {
    if (sequences.empty()) throw InputError("baum_welch: no sequences given");
    init.validate();
    if (config.pseudocount < 0.0) throw InputError("pseudocount must be nonnegative");

    TrainResult res;
    res.params = init;
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        SufficientStatistics total(res.params.num_sources());
        try {
            for (const ObservationSequence& seq : sequences)
                total.merge(accumulate_statistics(res.params, seq));
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) +
                                 "; use a smoothed initialization (all entries > 0)");
        }
        res.log_likelihood_trace.push_back(total.log_likelihood);
        if (iter > 0 && total.log_likelihood - prev_ll < config.tolerance) break;
        prev_ll = total.log_likelihood;
        res.params = m_step(total, res.params, config.pseudocount);
    }
    return res;
}

}  // namespace modfuse
