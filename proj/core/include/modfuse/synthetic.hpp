#pragma once

#include <cstdint>
#include <vector>

#include "modfuse/model.hpp"
#include "modfuse/pipeline.hpp"
#include "modfuse/reporting.hpp"

namespace modfuse {

// Published transition/emission estimates for the four default channels
// (Burbio, MCH, R2LT, SD). Rows are renormalized to sum exactly to 1; the
// published three-decimal rows can be off by up to 1e-3. Initial
// distribution is uniform (the source tables do not include one).
ModelParameters reference_parameters();

// Per-channel missing-cell probability calibrated to the reference coverage
// counts (fraction of district-weeks each source did NOT cover).
std::vector<double> reference_missingness();

struct GeneratorConfig {
    ModelParameters parameters;         // defaults to reference_parameters()
    int n_districts = 2000;
    int n_weeks = 42;
    WeekIndex start_week = WeekIndex::of(Date{2020, 9, 1});
    // one entry per channel: size 1 = stationary, size n_weeks = weekly schedule
    std::vector<std::vector<double>> missingness;
    std::uint64_t seed = 0;

    GeneratorConfig();
    void validate() const;
};

struct SyntheticCorpus {
    std::vector<std::vector<int>> truth_paths;  // [district][week]
    std::vector<ObservationSequence> sequences; // includes all-missing grids
    std::vector<DistrictRecord> districts;
};

// Fully reproducible given the seed; each district draws from its own
// derived RNG stream, so output is independent of generation order.
SyntheticCorpus generate(const GeneratorConfig& config);

struct RecoveryErrors {
    double initial = 0.0;                 // max abs entrywise error
    double transition = 0.0;
    std::vector<double> emissions;        // per channel
    double max_emission = 0.0;
};

// Entrywise errors after mapping fitted clusters onto truth labels.
RecoveryErrors score_recovery(const ModelParameters& truth, const ModelParameters& fitted,
                              const LabelAssignment& assignment);

// splitmix64; used to derive per-district seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace modfuse
