#include "modfuse/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "modfuse/errors.hpp"
#include "modfuse/inference.hpp"

namespace modfuse {

namespace {

const std::array<std::array<int, 3>, 6> kPermutations{{
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

const char* urban_rural_name(int cls) {
    switch (cls) {
        case 1: return "large_central_metro";
        case 2: return "large_fringe_metro";
        case 3: return "medium_metro";
        case 4: return "small_metro";
        case 5: return "micropolitan";
        case 6: return "non_core";
    }
    return "unknown";
}

// (leaid, week) -> category, one map per member (sources then model)
using MemberCells = std::vector<std::map<std::pair<std::string, WeekIndex>, int>>;

MemberCells member_cells(const std::vector<PosteriorDecode>& decodes, const WeeklyCells& cells,
                         const std::vector<std::string>& sources) {
    MemberCells out(sources.size() + 1);
    std::map<std::string, size_t> index;
    for (size_t c = 0; c < sources.size(); ++c) index[sources[c]] = c;
    for (const auto& [key, modality] : cells) {
        const auto& [source, leaid, week] = key;
        auto it = index.find(source);
        if (it == index.end())
            throw InputError("source '" + source + "' is not in the configured source order");
        out[it->second].emplace(std::make_pair(leaid, week), modality);
    }
    auto& model = out.back();
    for (const PosteriorDecode& d : decodes)
        for (const WeekDecode& w : d.per_week)
            model.emplace(std::make_pair(d.entity_id, w.week), w.state);
    return out;
}

double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

}  // namespace

LabelAssignment assign_labels(const std::vector<PosteriorDecode>& cluster_decodes,
                              const std::vector<ObservationSequence>& sequences) {
    if (cluster_decodes.size() != sequences.size())
        throw InputError("assign_labels: decode/sequence count mismatch");
    LabelAssignment out;
    long long total = 0;
    for (size_t s = 0; s < sequences.size(); ++s) {
        const ObservationSequence& seq = sequences[s];
        const PosteriorDecode& dec = cluster_decodes[s];
        if (dec.entity_id != seq.entity_id)
            throw InputError("assign_labels: decode order does not match sequence order");
        const int T = std::min<int>(seq.num_weeks, static_cast<int>(dec.per_week.size()));
        for (int t = 0; t < T; ++t) {
            const int cluster = dec.per_week[t].state;
            for (int c = 0; c < seq.num_sources; ++c) {
                const std::int8_t v = seq.cell(t, c);
                if (v == kMissing) continue;
                ++out.histogram[cluster][v];
                ++total;
            }
        }
    }
    if (total == 0) throw InputError("assign_labels: no observed cells to anchor labels");

    long long best_score = -1;
    for (const auto& perm : kPermutations) {
        long long score = 0;
        for (int c = 0; c < kNumStates; ++c) score += out.histogram[c][perm[c]];
        if (score > best_score) {  // strict: ties keep the lexicographically first
            best_score = score;
            out.label_of_cluster = {perm[0], perm[1], perm[2]};
        }
    }
    return out;
}

ModelParameters apply_assignment(const ModelParameters& params,
                                 const LabelAssignment& assignment) {
    const auto& perm = assignment.label_of_cluster;
    std::array<bool, kNumStates> seen{};
    for (int c = 0; c < kNumStates; ++c) {
        if (perm[c] < 0 || perm[c] >= kNumStates || seen[perm[c]])
            throw InputError("label assignment is not a bijection");
        seen[perm[c]] = true;
    }
    ModelParameters out = params;
    for (int i = 0; i < kNumStates; ++i) {
        out.initial[perm[i]] = params.initial[i];
        for (int j = 0; j < kNumStates; ++j)
            out.transition[perm[i]][perm[j]] = params.transition[i][j];
    }
    for (size_t c = 0; c < params.emissions.size(); ++c)
        for (int i = 0; i < kNumStates; ++i)
            out.emissions[c][perm[i]] = params.emissions[c][i];
    return out;
}

std::vector<PosteriorDecode> decode_all(const ModelParameters& params,
                                        const std::vector<ObservationSequence>& sequences,
                                        DecodeMode mode, double threshold) {
    std::vector<PosteriorDecode> out;
    out.reserve(sequences.size());
    for (const ObservationSequence& seq : sequences) {
        const ForwardBackwardResult fb = forward_backward(params, seq);
        PosteriorDecode dec;
        dec.entity_id = seq.entity_id;
        dec.per_week.resize(seq.num_weeks);
        std::vector<int> path;
        if (mode == DecodeMode::Viterbi) path = viterbi(params, seq).path;
        WeekIndex week = seq.start_week;
        for (int t = 0; t < seq.num_weeks; ++t) {
            WeekDecode& w = dec.per_week[t];
            w.week = week;
            w.posterior = fb.posterior[t];
            if (mode == DecodeMode::Posterior) {
                w.state = 0;
                for (int i = 1; i < kNumStates; ++i)
                    if (w.posterior[i] > w.posterior[w.state]) w.state = i;
            } else {
                w.state = path[t];
            }
            w.confidence = w.posterior[w.state];
            w.high_confidence = w.confidence >= threshold;
            week = week.next();
        }
        out.push_back(std::move(dec));
    }
    return out;
}

AgreementMatrix agreement_matrix(const std::vector<PosteriorDecode>& decodes,
                                 const WeeklyCells& cells,
                                 const std::vector<std::string>& sources) {
    const MemberCells mc = member_cells(decodes, cells, sources);
    const size_t n = mc.size();
    AgreementMatrix out;
    out.members = sources;
    out.members.push_back(kModelMember);
    out.overlap.assign(n, std::vector<long long>(n, 0));
    out.agreement.assign(n, std::vector<double>(n, std::nan("")));
    for (size_t a = 0; a < n; ++a) {
        for (size_t b = a; b < n; ++b) {
            long long overlap = 0, match = 0;
            // iterate the smaller map
            const auto& small = mc[a].size() <= mc[b].size() ? mc[a] : mc[b];
            const auto& large = mc[a].size() <= mc[b].size() ? mc[b] : mc[a];
            for (const auto& [key, value] : small) {
                auto it = large.find(key);
                if (it == large.end()) continue;
                ++overlap;
                if (it->second == value) ++match;
            }
            out.overlap[a][b] = out.overlap[b][a] = overlap;
            if (overlap > 0)
                out.agreement[a][b] = out.agreement[b][a] =
                    static_cast<double>(match) / static_cast<double>(overlap);
        }
    }
    return out;
}

TTestResult agreement_ttest(std::span<const double> sample_a, std::span<const double> sample_b) {
    const auto n_a = static_cast<long long>(sample_a.size());
    const auto n_b = static_cast<long long>(sample_b.size());
    if (n_a < 2 || n_b < 2)
        throw InputError("agreement_ttest: each sample needs at least 2 values");
    const double mean_a = sample_mean(sample_a);
    const double mean_b = sample_mean(sample_b);
    const double ss_a = sum_sq_dev(sample_a, mean_a);
    const double ss_b = sum_sq_dev(sample_b, mean_b);
    TTestResult res;
    res.n_a = n_a;
    res.n_b = n_b;
    const double df = static_cast<double>(n_a + n_b - 2);
    const double pooled_var = (ss_a + ss_b) / df;
    if (pooled_var <= 0.0) {
        if (mean_a == mean_b) {
            res.degenerate = true;  // both constant and equal: no information
            res.t = 0.0;
            res.p = 0.5;
            return res;
        }
        throw InputError("agreement_ttest: both samples have zero variance");
    }
    res.t = (mean_a - mean_b) /
            std::sqrt(pooled_var * (1.0 / static_cast<double>(n_a) + 1.0 / static_cast<double>(n_b)));
    boost::math::students_t_distribution<double> dist(df);
    res.p = boost::math::cdf(boost::math::complement(dist, res.t));  // P(T >= t)
    return res;
}

AgreementSamples agreement_samples(const std::string& source,
                                   const std::vector<PosteriorDecode>& decodes,
                                   const WeeklyCells& cells,
                                   const std::vector<std::string>& sources,
                                   AgreementUnit unit) {
    auto sit = std::find(sources.begin(), sources.end(), source);
    if (sit == sources.end()) throw InputError("unknown source '" + source + "'");
    const size_t self = static_cast<size_t>(sit - sources.begin());
    const MemberCells mc = member_cells(decodes, cells, sources);
    const size_t model = mc.size() - 1;

    struct Tally {
        long long model_overlap = 0, model_match = 0;
        long long other_overlap = 0, other_match = 0;
    };
    std::map<std::string, Tally> by_unit;  // leaid, or week string
    for (const auto& [key, value] : mc[self]) {
        const std::string unit_key = unit == AgreementUnit::District ? key.first : key.second.to_string();
        Tally& t = by_unit[unit_key];
        if (auto it = mc[model].find(key); it != mc[model].end()) {
            ++t.model_overlap;
            if (it->second == value) ++t.model_match;
        }
        for (size_t o = 0; o < sources.size(); ++o) {
            if (o == self) continue;
            if (auto it = mc[o].find(key); it != mc[o].end()) {
                ++t.other_overlap;
                if (it->second == value) ++t.other_match;
            }
        }
    }
    AgreementSamples out;
    for (const auto& [unit_key, t] : by_unit) {
        if (t.model_overlap > 0)
            out.versus_model.push_back(static_cast<double>(t.model_match) /
                                       static_cast<double>(t.model_overlap));
        if (t.other_overlap > 0)
            out.versus_others.push_back(static_cast<double>(t.other_match) /
                                        static_cast<double>(t.other_overlap));
    }
    return out;
}

std::vector<TrendRow> trend_report(const std::vector<PosteriorDecode>& decodes,
                                   const std::vector<DistrictRecord>& districts,
                                   Stratifier stratifier) {
    std::map<std::string, const DistrictRecord*> meta;
    for (const DistrictRecord& d : districts) meta[d.leaid] = &d;

    auto stratum_of = [&](const std::string& leaid) -> std::string {
        if (stratifier == Stratifier::None) return "all";
        auto it = meta.find(leaid);
        if (it == meta.end()) return "unknown";
        if (stratifier == Stratifier::State)
            return it->second->state.empty() ? "unknown" : it->second->state;
        return urban_rural_name(it->second->urban_rural);
    };

    // full stratum axis, independent of which districts got decoded
    std::set<std::string> strata;
    if (stratifier == Stratifier::None) {
        strata.insert("all");
    } else if (stratifier == Stratifier::State) {
        for (const DistrictRecord& d : districts)
            strata.insert(d.state.empty() ? "unknown" : d.state);
    } else {
        for (int cls = 1; cls <= 6; ++cls) strata.insert(urban_rural_name(cls));
        for (const DistrictRecord& d : districts)
            if (d.urban_rural == -1) strata.insert("unknown");
    }

    std::set<WeekIndex> weeks;
    std::map<std::pair<WeekIndex, std::string>, std::array<long long, kNumStates>> counts;
    for (const PosteriorDecode& d : decodes) {
        const std::string stratum = stratum_of(d.entity_id);
        strata.insert(stratum);
        for (const WeekDecode& w : d.per_week) {
            weeks.insert(w.week);
            ++counts[{w.week, stratum}][w.state];
        }
    }

    std::vector<TrendRow> rows;
    for (const WeekIndex& week : weeks) {
        for (const std::string& stratum : strata) {
            TrendRow row;
            row.week = week;
            row.stratum = stratum;
            auto it = counts.find({week, stratum});
            if (it != counts.end()) {
                const auto& c = it->second;
                row.n_districts = c[0] + c[1] + c[2];
                for (int m = 0; m < kNumStates; ++m)
                    row.pct[m] = 100.0 * static_cast<double>(c[m]) /
                                 static_cast<double>(row.n_districts);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<SnapshotRow> state_snapshot(const std::vector<PosteriorDecode>& decodes,
                                        const std::vector<DistrictRecord>& districts,
                                        const std::vector<WeekIndex>& weeks) {
    std::map<std::string, std::string> state_of;
    for (const DistrictRecord& d : districts)
        state_of[d.leaid] = d.state.empty() ? "unknown" : d.state;

    std::map<std::pair<WeekIndex, std::string>, std::pair<long long, long long>> tally;
    std::set<WeekIndex> wanted(weeks.begin(), weeks.end());
    for (const PosteriorDecode& d : decodes) {
        auto it = state_of.find(d.entity_id);
        const std::string state = it == state_of.end() ? "unknown" : it->second;
        for (const WeekDecode& w : d.per_week) {
            if (!wanted.count(w.week)) continue;
            auto& [n, inperson] = tally[{w.week, state}];
            ++n;
            if (w.state == 2) ++inperson;
        }
    }
    std::vector<SnapshotRow> rows;
    for (const auto& [key, value] : tally) {
        SnapshotRow row;
        row.week = key.first;
        row.state = key.second;
        row.n_districts = value.first;
        row.pct_inperson = 100.0 * static_cast<double>(value.second) /
                           static_cast<double>(value.first);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace modfuse
