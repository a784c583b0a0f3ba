#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "modfuse/model.hpp"
#include "modfuse/pipeline.hpp"

namespace modfuse {

// Bijection from unsupervised cluster index to modality label index.
struct LabelAssignment {
    std::array<int, kNumStates> label_of_cluster{0, 1, 2};
    // histogram[cluster][reported category], pooled over all observed cells
    std::array<std::array<long long, kNumStates>, kNumStates> histogram{};
};

// Picks the bijection maximizing total matches between cluster-decoded weeks
// and reported categories; ties break to the lexicographically smallest
// permutation. Throws InputError when there are no observed cells at all.
LabelAssignment assign_labels(const std::vector<PosteriorDecode>& cluster_decodes,
                              const std::vector<ObservationSequence>& sequences);

// Permute states of `params` so that state label_of_cluster[c] holds what
// cluster c held. Posteriors/paths of the permuted model are the permuted
// posteriors/paths of the original.
ModelParameters apply_assignment(const ModelParameters& params, const LabelAssignment& assignment);

enum class DecodeMode { Posterior, Viterbi };

// Posterior mode: per-week argmax of smoothed marginals. Viterbi mode: the
// joint-MAP path, confidence taken from the posterior marginal of the chosen
// state. high_confidence = confidence >= threshold.
std::vector<PosteriorDecode> decode_all(const ModelParameters& params,
                                        const std::vector<ObservationSequence>& sequences,
                                        DecodeMode mode = DecodeMode::Posterior,
                                        double threshold = 0.75);

inline constexpr const char* kModelMember = "HMM";

struct AgreementMatrix {
    std::vector<std::string> members;            // sources then kModelMember
    std::vector<std::vector<long long>> overlap; // district-weeks where both report
    std::vector<std::vector<double>> agreement;  // NaN when overlap == 0
};

AgreementMatrix agreement_matrix(const std::vector<PosteriorDecode>& decodes,
                                 const WeeklyCells& cells,
                                 const std::vector<std::string>& sources);

struct TTestResult {
    double t = 0.0;
    double p = 0.5;  // one-sided, P(T >= t)
    long long n_a = 0;
    long long n_b = 0;
    bool degenerate = false;  // both samples constant and equal
};

// Two-sample pooled-variance Student's t.
TTestResult agreement_ttest(std::span<const double> sample_a, std::span<const double> sample_b);

enum class AgreementUnit { District, Week };

// For one source: agreement proportions with the model vs with the pooled
// remaining sources, one value per district (or per week).
struct AgreementSamples {
    std::vector<double> versus_model;
    std::vector<double> versus_others;
};
AgreementSamples agreement_samples(const std::string& source,
                                   const std::vector<PosteriorDecode>& decodes,
                                   const WeeklyCells& cells,
                                   const std::vector<std::string>& sources,
                                   AgreementUnit unit = AgreementUnit::District);

enum class Stratifier { None, State, UrbanRural };

struct TrendRow {
    WeekIndex week{};
    std::string stratum;  // "all", state code, urban-rural class, or "unknown"
    long long n_districts = 0;
    Vec3 pct{};  // percent remote/hybrid/in-person; meaningful only when n_districts > 0
};

// Per week (and stratum) percentage of decoded districts in each modality.
// Strata with zero decoded districts are still emitted (null percentages).
std::vector<TrendRow> trend_report(const std::vector<PosteriorDecode>& decodes,
                                   const std::vector<DistrictRecord>& districts,
                                   Stratifier stratifier);

struct SnapshotRow {
    WeekIndex week{};
    std::string state;
    long long n_districts = 0;
    double pct_inperson = 0.0;
};

std::vector<SnapshotRow> state_snapshot(const std::vector<PosteriorDecode>& decodes,
                                        const std::vector<DistrictRecord>& districts,
                                        const std::vector<WeekIndex>& weeks);

}  // namespace modfuse
