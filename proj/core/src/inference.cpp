#include "modfuse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modfuse/errors.hpp"

namespace modfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp3(const Vec3& v) {
    const double m = std::max({v[0], v[1], v[2]});
    if (m == kNegInf) return kNegInf;
    return m + std::log(std::exp(v[0] - m) + std::exp(v[1] - m) + std::exp(v[2] - m));
}

struct LogParams {
    Vec3 initial;
    Mat3 transition;
    std::vector<Mat3> emissions;

    explicit LogParams(const ModelParameters& p) : emissions(p.emissions.size()) {
        auto lg = [](double x) { return x > 0.0 ? std::log(x) : kNegInf; };
        for (int i = 0; i < kNumStates; ++i) {
            initial[i] = lg(p.initial[i]);
            for (int j = 0; j < kNumStates; ++j) transition[i][j] = lg(p.transition[i][j]);
        }
        for (size_t c = 0; c < p.emissions.size(); ++c)
            for (int i = 0; i < kNumStates; ++i)
                for (int j = 0; j < kNumStates; ++j) emissions[c][i][j] = lg(p.emissions[c][i][j]);
    }

    double emission(const std::int8_t* row, int n, int state) const {
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            const std::int8_t v = row[c];
            if (v == kMissing) continue;
            sum += emissions[c][state][v];
        }
        return sum;
    }
};

void check_inputs(const ModelParameters& params, const ObservationSequence& seq) {
    params.validate();
    seq.validate();
    if (seq.num_sources != params.num_sources())
        throw InputError("sequence '" + seq.entity_id + "' has " +
                         std::to_string(seq.num_sources) + " channels but model has " +
                         std::to_string(params.num_sources()));
}

[[noreturn]] void impossible(const ObservationSequence& seq, int week) {
    throw NumericalError("impossible observation: sequence '" + seq.entity_id +
                         "' has zero likelihood at week offset " + std::to_string(week) +
                         " (" + "week " +
                         WeekIndex::of(Date::from_serial(seq.start_week.week_start().serial() +
                                                         static_cast<std::int64_t>(week) * 7))
                             .to_string() +
                         ")");
}

// alpha[t][i] = log P(obs[0..t], state_t = i); backward fills beta in place.
std::vector<Vec3> forward(const LogParams& lp, const ObservationSequence& seq) {
    const int T = seq.num_weeks;
    std::vector<Vec3> alpha(T);
    for (int i = 0; i < kNumStates; ++i)
        alpha[0][i] = lp.initial[i] + lp.emission(seq.row(0), seq.num_sources, i);
    if (log_sum_exp3(alpha[0]) == kNegInf) impossible(seq, 0);
    for (int t = 1; t < T; ++t) {
        for (int j = 0; j < kNumStates; ++j) {
            Vec3 terms;
            for (int i = 0; i < kNumStates; ++i) terms[i] = alpha[t - 1][i] + lp.transition[i][j];
            alpha[t][j] = log_sum_exp3(terms) + lp.emission(seq.row(t), seq.num_sources, j);
        }
        if (log_sum_exp3(alpha[t]) == kNegInf) impossible(seq, t);
    }
    return alpha;
}

}  // namespace

double emission_log_factor(const ModelParameters& params, std::span<const std::int8_t> row,
                           int state) {
    if (state < 0 || state >= kNumStates) throw InputError("state index out of range");
    if (static_cast<int>(row.size()) != params.num_sources())
        throw InputError("row has " + std::to_string(row.size()) + " cells but model has " +
                         std::to_string(params.num_sources()) + " channels");
    double sum = 0.0;
    for (size_t c = 0; c < row.size(); ++c) {
        const std::int8_t v = row[c];
        if (v == kMissing) continue;
        if (v < 0 || v >= kNumStates) throw InputError("category out of range in observation row");
        const double p = params.emissions[c][state][v];
        if (p <= 0.0) return kNegInf;
        sum += std::log(p);
    }
    return sum;
}

ForwardBackwardResult forward_backward(const ModelParameters& params,
                                       const ObservationSequence& seq) {
    check_inputs(params, seq);
    const LogParams lp(params);
    const int T = seq.num_weeks;
    const int S = seq.num_sources;

    const std::vector<Vec3> alpha = forward(lp, seq);
    const double ll = log_sum_exp3(alpha[T - 1]);

    std::vector<Vec3> beta(T);
    beta[T - 1] = {0.0, 0.0, 0.0};
    for (int t = T - 2; t >= 0; --t) {
        Vec3 emit_next;
        for (int j = 0; j < kNumStates; ++j)
            emit_next[j] = lp.emission(seq.row(t + 1), S, j) + beta[t + 1][j];
        for (int i = 0; i < kNumStates; ++i) {
            Vec3 terms;
            for (int j = 0; j < kNumStates; ++j) terms[j] = lp.transition[i][j] + emit_next[j];
            beta[t][i] = log_sum_exp3(terms);
        }
    }

    ForwardBackwardResult res;
    res.log_likelihood = ll;
    res.posterior.resize(T);
    for (int t = 0; t < T; ++t) {
        double norm = 0.0;
        for (int i = 0; i < kNumStates; ++i) {
            res.posterior[t][i] = std::exp(alpha[t][i] + beta[t][i] - ll);
            norm += res.posterior[t][i];
        }
        for (int i = 0; i < kNumStates; ++i) res.posterior[t][i] /= norm;
    }

    res.transition_posterior.resize(T > 1 ? T - 1 : 0);
    for (int t = 0; t + 1 < T; ++t) {
        Vec3 emit_next;
        for (int j = 0; j < kNumStates; ++j)
            emit_next[j] = lp.emission(seq.row(t + 1), S, j) + beta[t + 1][j];
        double norm = 0.0;
        for (int i = 0; i < kNumStates; ++i)
            for (int j = 0; j < kNumStates; ++j) {
                const double v =
                    std::exp(alpha[t][i] + lp.transition[i][j] + emit_next[j] - ll);
                res.transition_posterior[t][i][j] = v;
                norm += v;
            }
        for (int i = 0; i < kNumStates; ++i)
            for (int j = 0; j < kNumStates; ++j) res.transition_posterior[t][i][j] /= norm;
    }
    return res;
}

ViterbiResult viterbi(const ModelParameters& params, const ObservationSequence& seq) {
    check_inputs(params, seq);
    const LogParams lp(params);
    const int T = seq.num_weeks;

    std::vector<Vec3> delta(T);
    std::vector<std::array<int, kNumStates>> psi(T);
    for (int i = 0; i < kNumStates; ++i)
        delta[0][i] = lp.initial[i] + lp.emission(seq.row(0), seq.num_sources, i);
    if (std::max({delta[0][0], delta[0][1], delta[0][2]}) == kNegInf) impossible(seq, 0);
    for (int t = 1; t < T; ++t) {
        for (int j = 0; j < kNumStates; ++j) {
            int best_i = 0;
            double best = delta[t - 1][0] + lp.transition[0][j];
            for (int i = 1; i < kNumStates; ++i) {
                const double v = delta[t - 1][i] + lp.transition[i][j];
                if (v > best) {  // strict: ties keep the lower index
                    best = v;
                    best_i = i;
                }
            }
            psi[t][j] = best_i;
            delta[t][j] = best + lp.emission(seq.row(t), seq.num_sources, j);
        }
        if (std::max({delta[t][0], delta[t][1], delta[t][2]}) == kNegInf) impossible(seq, t);
    }

    ViterbiResult res;
    res.path.resize(T);
    int last = 0;
    for (int i = 1; i < kNumStates; ++i)
        if (delta[T - 1][i] > delta[T - 1][last]) last = i;
    res.log_probability = delta[T - 1][last];
    res.path[T - 1] = last;
    for (int t = T - 1; t > 0; --t) res.path[t - 1] = psi[t][res.path[t]];
    return res;
}

SufficientStatistics accumulate_statistics(const ModelParameters& params,
                                           const ObservationSequence& seq) {
    const ForwardBackwardResult fb = forward_backward(params, seq);
    SufficientStatistics stats(params.num_sources());
    stats.log_likelihood = fb.log_likelihood;
    stats.start = fb.posterior[0];
    for (const Mat3& xi : fb.transition_posterior)
        for (int i = 0; i < kNumStates; ++i)
            for (int j = 0; j < kNumStates; ++j) stats.transition[i][j] += xi[i][j];
    for (int t = 0; t < seq.num_weeks; ++t)
        for (int c = 0; c < seq.num_sources; ++c) {
            const std::int8_t v = seq.cell(t, c);
            if (v == kMissing) continue;
            for (int i = 0; i < kNumStates; ++i) stats.emissions[c][i][v] += fb.posterior[t][i];
        }
    return stats;
}

double sequence_log_likelihood(const ModelParameters& params, const ObservationSequence& seq) {
    check_inputs(params, seq);
    const LogParams lp(params);
    const std::vector<Vec3> alpha = forward(lp, seq);
    return log_sum_exp3(alpha[seq.num_weeks - 1]);
}

}  // namespace modfuse
