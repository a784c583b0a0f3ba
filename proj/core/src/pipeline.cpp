#include "modfuse/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "modfuse/errors.hpp"

namespace modfuse {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// case-insensitive word-boundary substring match
bool contains_word(const std::string& haystack_lower, const std::string& word) {
    size_t pos = 0;
    while ((pos = haystack_lower.find(word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]);
        const size_t end = pos + word.size();
        const bool right_ok = end == haystack_lower.size() || !is_word_char(haystack_lower[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

bool parse_int_field(const std::string& raw, int& out) {
    const std::string t = trim(raw);
    if (t.empty()) {
        out = -1;  // unknown
        return true;
    }
    try {
        size_t used = 0;
        long v = std::stol(t, &used);
        if (used != t.size()) return false;
        out = static_cast<int>(v);
        return true;
    } catch (...) {
        return false;
    }
}

bool parse_ll_field(const std::string& raw, long long& out) {
    const std::string t = trim(raw);
    if (t.empty()) {
        out = -1;
        return true;
    }
    try {
        size_t used = 0;
        long long v = std::stoll(t, &used);
        if (used != t.size()) return false;
        out = v;
        return true;
    } catch (...) {
        return false;
    }
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig cfg;
    cfg.category_map = {
        {"remote", 0},         {"full remote", 0},   {"fully remote", 0},
        {"full-time remote", 0},
        {"hybrid", 1},         {"blended", 1},
        {"in-person", 2},      {"in person", 2},     {"inperson", 2},
        {"full in-person", 2}, {"fully in-person", 2}, {"full-time in-person", 2},
    };
    return cfg;
}

std::vector<WeekIndex> PipelineConfig::window_weeks() const {
    if (window_end < window_start)
        throw InputError("study window end precedes start");
    std::vector<WeekIndex> weeks;
    WeekIndex w = WeekIndex::of(window_start);
    const WeekIndex last = WeekIndex::of(window_end);
    while (true) {
        weeks.push_back(w);
        if (w == last) break;
        w = w.next();
    }
    return weeks;
}

int PipelineConfig::normalize_category(const std::string& raw) const {
    auto it = category_map.find(lower(trim(raw)));
    return it == category_map.end() ? -1 : it->second;
}

FilterResult filter_eligible(const std::vector<DistrictRecord>& districts,
                             const std::vector<std::string>& keywords) {
    static const std::set<int> kAgencyTypes{1, 2, 7};
    static const std::set<int> kStatuses{1, 3, 4, 5, 8};
    FilterResult res;
    for (const DistrictRecord& d : districts) {
        if (!kAgencyTypes.count(d.agency_type)) {
            res.excluded.push_back({d.leaid, "agency_type"});
            continue;
        }
        if (!kStatuses.count(d.operating_status)) {
            res.excluded.push_back({d.leaid, "operating_status"});
            continue;
        }
        const std::string name = lower(d.name);
        bool hit = false;
        for (const std::string& kw : keywords) {
            if (contains_word(name, lower(kw))) {
                res.excluded.push_back({d.leaid, "keyword:" + lower(kw)});
                hit = true;
                break;
            }
        }
        if (!hit) res.eligible.push_back(d);
    }
    return res;
}

WeeklyCells aggregate_to_weeks(const std::vector<RawReport>& reports, const PipelineConfig& config,
                               long long* dropped_out_of_window) {
    // per cell: the reports on the currently-latest date
    struct CellState {
        Date latest;
        std::array<int, kNumStates> counts{};
    };
    std::map<std::tuple<std::string, std::string, WeekIndex>, CellState> acc;
    long long dropped = 0;
    for (const RawReport& r : reports) {
        if (r.report_date < config.window_start || config.window_end < r.report_date) {
            ++dropped;
            continue;
        }
        if (r.modality < 0 || r.modality >= kNumStates)
            throw InputError("report for district '" + r.leaid + "' has invalid modality");
        auto key = std::make_tuple(r.source, r.leaid, WeekIndex::of(r.report_date));
        auto [it, inserted] = acc.try_emplace(key);
        CellState& cell = it->second;
        if (inserted || cell.latest < r.report_date) {
            cell.latest = r.report_date;
            cell.counts = {};
            cell.counts[r.modality] = 1;
        } else if (cell.latest == r.report_date) {
            ++cell.counts[r.modality];
        }
    }
    if (dropped_out_of_window) *dropped_out_of_window = dropped;

    WeeklyCells out;
    for (const auto& [key, cell] : acc) {
        int best = 0;
        bool tie = false;
        for (int m = 1; m < kNumStates; ++m) {
            if (cell.counts[m] > cell.counts[best]) {
                best = m;
                tie = false;
            } else if (cell.counts[m] == cell.counts[best]) {
                tie = true;
            }
        }
        out.emplace(key, tie ? 1 : best);  // remaining ties -> hybrid
    }
    return out;
}

BuildResult build_sequences(const WeeklyCells& cells,
                            const std::vector<DistrictRecord>& eligible,
                            const PipelineConfig& config) {
    const std::vector<WeekIndex> weeks = config.window_weeks();
    const int T = static_cast<int>(weeks.size());
    const int S = static_cast<int>(config.sources.size());
    std::map<std::string, int> source_index;
    for (int c = 0; c < S; ++c) source_index[config.sources[c]] = c;
    std::map<WeekIndex, int> week_index;
    for (int t = 0; t < T; ++t) week_index[weeks[t]] = t;

    std::set<std::string> eligible_ids;
    for (const DistrictRecord& d : eligible) eligible_ids.insert(d.leaid);

    std::map<std::string, ObservationSequence> grids;
    std::set<std::string> unknown;
    for (const auto& [key, modality] : cells) {
        const auto& [source, leaid, week] = key;
        auto sit = source_index.find(source);
        if (sit == source_index.end())
            throw InputError("source '" + source + "' is not in the configured source order");
        auto wit = week_index.find(week);
        if (wit == week_index.end()) continue;  // outside window
        if (!eligible_ids.count(leaid)) {
            unknown.insert(leaid);
            continue;
        }
        auto [git, inserted] = grids.try_emplace(leaid);
        if (inserted)
            git->second = ObservationSequence::all_missing(leaid, weeks.front(), T, S);
        git->second.cell(wit->second, sit->second) = static_cast<std::int8_t>(modality);
    }

    BuildResult res;
    // iterate eligible order for deterministic, metadata-driven output order
    for (const DistrictRecord& d : eligible) {
        auto it = grids.find(d.leaid);
        if (it != grids.end()) res.sequences.push_back(std::move(it->second));
    }
    res.unknown_leaids.assign(unknown.begin(), unknown.end());
    return res;
}

CoverageSummary coverage_summary(const std::vector<ObservationSequence>& sequences,
                                 const std::vector<std::string>& sources) {
    CoverageSummary sum;
    sum.per_source.resize(sources.size());
    for (size_t c = 0; c < sources.size(); ++c) sum.per_source[c].source = sources[c];
    for (const ObservationSequence& seq : sequences) {
        sum.total_district_weeks += seq.num_weeks;
        std::vector<bool> source_seen(sources.size(), false);
        bool any = false;
        for (int t = 0; t < seq.num_weeks; ++t) {
            bool week_any = false;
            for (int c = 0; c < seq.num_sources; ++c) {
                if (seq.cell(t, c) == kMissing) continue;
                ++sum.per_source[c].district_weeks;
                source_seen[c] = true;
                week_any = true;
            }
            if (week_any) ++sum.union_district_weeks;
            any = any || week_any;
        }
        if (any) ++sum.union_districts;
        for (size_t c = 0; c < sources.size(); ++c)
            if (source_seen[c]) ++sum.per_source[c].districts;
    }
    return sum;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<RawReport> load_reports(std::istream& in, const std::string& filename,
                                    const PipelineConfig& config) {
    std::vector<RawReport> reports;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line))
        throw InputError(filename + ": empty reports file");
    ++lineno;
    if (split_csv_line(line) != std::vector<std::string>{"source", "leaid", "report_date", "modality"})
        throw InputError(filename + ":1: expected header 'source,leaid,report_date,modality'");
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 4)
            throw InputError(filename + ":" + std::to_string(lineno) + ": expected 4 fields");
        RawReport r;
        r.source = trim(f[0]);
        r.leaid = trim(f[1]);
        try {
            r.report_date = Date::parse(trim(f[2]));
        } catch (const InputError& e) {
            throw InputError(filename + ":" + std::to_string(lineno) + ": " + e.what());
        }
        r.modality = config.normalize_category(f[3]);
        if (r.modality < 0)
            throw InputError(filename + ":" + std::to_string(lineno) + ": unknown modality '" +
                             trim(f[3]) + "' (extend the category map in the pipeline config)");
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<RawReport> load_reports_file(const std::string& path, const PipelineConfig& config) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open reports file '" + path + "'");
    return load_reports(in, path, config);
}

std::vector<DistrictRecord> load_districts(std::istream& in, const std::string& filename,
                                           std::vector<Exclusion>& unparseable) {
    std::vector<DistrictRecord> out;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line))
        throw InputError(filename + ": empty metadata file");
    ++lineno;
    const std::vector<std::string> expected{"leaid",       "name",        "state",
                                            "agency_type", "operating_status", "county_fips",
                                            "urban_rural", "enrollment",  "school_count"};
    if (split_csv_line(line) != expected)
        throw InputError(filename + ":1: unexpected metadata header");
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        const std::string where = filename + ":" + std::to_string(lineno);
        if (f.size() != 9 || trim(f[0]).empty()) {
            unparseable.push_back({f.empty() ? "" : trim(f[0]), "unparseable"});
            continue;
        }
        DistrictRecord d;
        d.leaid = trim(f[0]);
        d.name = trim(f[1]);
        d.state = trim(f[2]);
        bool ok = parse_int_field(f[3], d.agency_type) && parse_int_field(f[4], d.operating_status);
        d.county_fips = trim(f[5]);
        ok = ok && parse_int_field(f[6], d.urban_rural) && parse_ll_field(f[7], d.enrollment) &&
             parse_int_field(f[8], d.school_count);
        if (!ok || (d.urban_rural != -1 && (d.urban_rural < 1 || d.urban_rural > 6))) {
            unparseable.push_back({d.leaid, "unparseable"});
            continue;
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<DistrictRecord> load_districts_file(const std::string& path,
                                                std::vector<Exclusion>& unparseable) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open metadata file '" + path + "'");
    return load_districts(in, path, unparseable);
}

}  // namespace modfuse
