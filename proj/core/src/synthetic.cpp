#include "modfuse/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "modfuse/errors.hpp"

namespace modfuse {

namespace {

Mat3 normalized(Mat3 m) {
    for (auto& row : m) {
        const double s = row[0] + row[1] + row[2];
        for (double& v : row) v /= s;
    }
    return m;
}

double next_uniform(std::mt19937_64& rng) {
    // 53-bit mantissa; avoids distribution objects, whose output is not
    // pinned down by the standard across implementations
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_categorical(const Vec3& probs, std::mt19937_64& rng) {
    const double u = next_uniform(rng);
    double acc = 0.0;
    for (int i = 0; i < kNumStates - 1; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return kNumStates - 1;
}

const char* kStates[] = {"AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA",
                         "HI", "ID", "IL", "IN", "IA", "KS", "KY", "LA", "ME", "MD",
                         "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ",
                         "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC",
                         "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY"};

}  // namespace

ModelParameters reference_parameters() {
    ModelParameters p;
    p.initial = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    p.transition = normalized({{{0.903, 0.079, 0.018},
                                {0.014, 0.961, 0.025},
                                {0.004, 0.013, 0.983}}});
    p.sources = {"Burbio", "MCH", "R2LT", "SD"};
    p.emissions = {
        normalized({{{0.805, 0.145, 0.050}, {0.067, 0.617, 0.317}, {0.016, 0.161, 0.823}}}),
        normalized({{{0.795, 0.178, 0.027}, {0.090, 0.775, 0.135}, {0.055, 0.347, 0.598}}}),
        normalized({{{0.992, 0.008, 0.001}, {0.002, 0.997, 0.001}, {0.001, 0.001, 0.997}}}),
        normalized({{{0.642, 0.330, 0.028}, {0.003, 0.863, 0.134}, {0.001, 0.042, 0.956}}}),
    };
    return p;
}

std::vector<double> reference_missingness() {
    // 1 - covered district-weeks / 616,896 for Burbio, MCH, R2LT, SD
    const double total = 616896.0;
    return {1.0 - 37589.0 / total, 1.0 - 58137.0 / total, 1.0 - 343596.0 / total,
            1.0 - 24732.0 / total};
}

GeneratorConfig::GeneratorConfig() : parameters(reference_parameters()) {
    for (double m : reference_missingness()) missingness.push_back({m});
}

void GeneratorConfig::validate() const {
    parameters.validate();
    if (n_districts < 1) throw InputError("n_districts must be positive");
    if (n_weeks < 1) throw InputError("n_weeks must be positive");
    if (static_cast<int>(missingness.size()) != parameters.num_sources())
        throw InputError("missingness needs one entry per source channel");
    for (const auto& sched : missingness) {
        if (sched.size() != 1 && static_cast<int>(sched.size()) != n_weeks)
            throw InputError("missingness schedule must have length 1 or n_weeks");
        for (double m : sched)
            if (!(m >= 0.0 && m <= 1.0)) throw InputError("missingness must be in [0,1]");
    }
}

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SyntheticCorpus generate(const GeneratorConfig& config) {
    config.validate();
    const int S = config.parameters.num_sources();
    SyntheticCorpus corpus;
    corpus.truth_paths.reserve(config.n_districts);
    corpus.sequences.reserve(config.n_districts);
    corpus.districts.reserve(config.n_districts);

    for (int d = 0; d < config.n_districts; ++d) {
        std::mt19937_64 rng(mix_seed(config.seed ^ (0x1000000ULL + static_cast<std::uint64_t>(d))));
        char leaid[16];
        std::snprintf(leaid, sizeof leaid, "%07d", d + 1);

        DistrictRecord rec;
        rec.leaid = leaid;
        rec.name = std::string("Synthetic District ") + leaid;
        const int state_idx = static_cast<int>(rng() % 50);
        rec.state = kStates[state_idx];
        rec.agency_type = (rng() % 10 == 0) ? 7 : (rng() % 2 == 0 ? 1 : 2);
        rec.operating_status = 1;
        char fips[8];
        std::snprintf(fips, sizeof fips, "%02d%03d", state_idx + 1,
                      static_cast<int>(rng() % 200) + 1);
        rec.county_fips = fips;
        rec.urban_rural = static_cast<int>(rng() % 6) + 1;
        rec.enrollment = 200 + static_cast<long long>(rng() % 8000);
        rec.school_count = 1 + static_cast<int>(rng() % 20);
        corpus.districts.push_back(std::move(rec));

        std::vector<int> path(config.n_weeks);
        ObservationSequence seq =
            ObservationSequence::all_missing(leaid, config.start_week, config.n_weeks, S);
        int state = sample_categorical(config.parameters.initial, rng);
        for (int t = 0; t < config.n_weeks; ++t) {
            if (t > 0) state = sample_categorical(config.parameters.transition[state], rng);
            path[t] = state;
            for (int c = 0; c < S; ++c) {
                const int emitted =
                    sample_categorical(config.parameters.emissions[c][state], rng);
                const auto& sched = config.missingness[c];
                const double miss = sched.size() == 1 ? sched[0] : sched[t];
                if (next_uniform(rng) >= miss) seq.cell(t, c) = static_cast<std::int8_t>(emitted);
            }
        }
        corpus.truth_paths.push_back(std::move(path));
        corpus.sequences.push_back(std::move(seq));
    }
    return corpus;
}

RecoveryErrors score_recovery(const ModelParameters& truth, const ModelParameters& fitted,
                              const LabelAssignment& assignment) {
    if (truth.num_sources() != fitted.num_sources())
        throw InputError("score_recovery: channel count mismatch");
    const ModelParameters aligned = apply_assignment(fitted, assignment);
    RecoveryErrors err;
    for (int i = 0; i < kNumStates; ++i) {
        err.initial = std::max(err.initial, std::abs(aligned.initial[i] - truth.initial[i]));
        for (int j = 0; j < kNumStates; ++j)
            err.transition =
                std::max(err.transition, std::abs(aligned.transition[i][j] - truth.transition[i][j]));
    }
    err.emissions.resize(truth.emissions.size(), 0.0);
    for (size_t c = 0; c < truth.emissions.size(); ++c) {
        for (int i = 0; i < kNumStates; ++i)
            for (int j = 0; j < kNumStates; ++j)
                err.emissions[c] = std::max(err.emissions[c],
                    std::abs(aligned.emissions[c][i][j] - truth.emissions[c][i][j]));
        err.max_emission = std::max(err.max_emission, err.emissions[c]);
    }
    return err;
}

}  // namespace modfuse
