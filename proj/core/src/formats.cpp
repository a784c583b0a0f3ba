#include "modfuse/formats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "modfuse/errors.hpp"

namespace modfuse {

namespace {

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

void write_decodes(std::ostream& out, const std::vector<PosteriorDecode>& decodes) {
    out << "leaid,week_start,modality,p_remote,p_hybrid,p_inperson,high_confidence\n";
    for (const PosteriorDecode& d : decodes)
        for (const WeekDecode& w : d.per_week)
            out << d.entity_id << ',' << w.week.week_start().to_string() << ','
                << modality_name(w.state) << ',' << fixed6(w.posterior[0]) << ','
                << fixed6(w.posterior[1]) << ',' << fixed6(w.posterior[2]) << ','
                << (w.high_confidence ? '1' : '0') << '\n';
}

void write_decodes_file(const std::string& path, const std::vector<PosteriorDecode>& decodes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_decodes(out, decodes);
}

std::vector<PosteriorDecode> load_decodes_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open decode file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) ||
        split_csv_line(line) !=
            std::vector<std::string>{"leaid", "week_start", "modality", "p_remote", "p_hybrid",
                                     "p_inperson", "high_confidence"})
        throw InputError(path + ":1: unexpected decode header");
    std::vector<PosteriorDecode> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 7 fields");
        if (out.empty() || out.back().entity_id != f[0]) {
            out.emplace_back();
            out.back().entity_id = f[0];
        }
        WeekDecode w;
        w.week = WeekIndex::of(Date::parse(f[1]));
        const int m = modality_from_name(f[2]);
        if (m < 0)
            throw InputError(path + ":" + std::to_string(lineno) + ": unknown modality '" + f[2] + "'");
        w.state = m;
        for (int i = 0; i < kNumStates; ++i) w.posterior[i] = std::stod(f[3 + i]);
        w.confidence = w.posterior[w.state];
        w.high_confidence = f[6] == "1";
        out.back().per_week.push_back(w);
    }
    return out;
}

void write_agreement_matrix(std::ostream& out, const AgreementMatrix& m) {
    out << "member";
    for (const std::string& name : m.members) out << ',' << name;
    out << '\n';
    for (size_t a = 0; a < m.members.size(); ++a) {
        out << m.members[a];
        for (size_t b = 0; b < m.members.size(); ++b) {
            out << ',';
            if (!std::isnan(m.agreement[a][b])) out << fixed6(m.agreement[a][b]);
        }
        out << '\n';
    }
}

void write_agreement_pairs(std::ostream& out, const AgreementMatrix& m) {
    out << "pair,overlap,agreement\n";
    for (size_t a = 0; a < m.members.size(); ++a)
        for (size_t b = a + 1; b < m.members.size(); ++b) {
            out << m.members[a] << '|' << m.members[b] << ',' << m.overlap[a][b] << ',';
            if (!std::isnan(m.agreement[a][b])) out << fixed6(m.agreement[a][b]);
            out << '\n';
        }
}

void write_trend_rows(std::ostream& out, const std::vector<TrendRow>& rows) {
    out << "week_start,stratum,pct_remote,pct_hybrid,pct_inperson\n";
    for (const TrendRow& r : rows) {
        out << r.week.week_start().to_string() << ',' << r.stratum << ',';
        if (r.n_districts > 0)
            out << fixed4(r.pct[0]) << ',' << fixed4(r.pct[1]) << ',' << fixed4(r.pct[2]);
        else
            out << ",,";
        out << '\n';
    }
}

void write_snapshot_rows(std::ostream& out, const std::vector<SnapshotRow>& rows) {
    out << "week_start,state,n_districts,pct_inperson\n";
    for (const SnapshotRow& r : rows)
        out << r.week.week_start().to_string() << ',' << r.state << ',' << r.n_districts << ','
            << fixed4(r.pct_inperson) << '\n';
}

void write_coverage(std::ostream& out, const CoverageSummary& cov) {
    out << "source,districts,district_weeks\n";
    for (const SourceCoverage& s : cov.per_source)
        out << s.source << ',' << s.districts << ',' << s.district_weeks << '\n';
    out << "union," << cov.union_districts << ',' << cov.union_district_weeks << '\n';
    out << "total," << cov.union_districts << ',' << cov.total_district_weeks << '\n';
}

void write_truth(std::ostream& out, const std::vector<ObservationSequence>& sequences,
                 const std::vector<std::vector<int>>& truth_paths) {
    if (sequences.size() != truth_paths.size())
        throw InputError("write_truth: sequence/path count mismatch");
    out << "leaid,week_start,true_modality\n";
    for (size_t s = 0; s < sequences.size(); ++s) {
        WeekIndex week = sequences[s].start_week;
        for (int state : truth_paths[s]) {
            out << sequences[s].entity_id << ',' << week.week_start().to_string() << ','
                << modality_name(state) << '\n';
            week = week.next();
        }
    }
}

void write_reports(std::ostream& out, const std::vector<ObservationSequence>& sequences,
                   const std::vector<std::string>& sources) {
    out << "source,leaid,report_date,modality\n";
    for (const ObservationSequence& seq : sequences) {
        WeekIndex week = seq.start_week;
        for (int t = 0; t < seq.num_weeks; ++t) {
            for (int c = 0; c < seq.num_sources; ++c) {
                const std::int8_t v = seq.cell(t, c);
                if (v == kMissing) continue;
                out << sources[c] << ',' << seq.entity_id << ','
                    << week.week_start().to_string() << ',' << modality_name(v) << '\n';
            }
            week = week.next();
        }
    }
}

void write_districts(std::ostream& out, const std::vector<DistrictRecord>& districts) {
    out << "leaid,name,state,agency_type,operating_status,county_fips,urban_rural,enrollment,"
           "school_count\n";
    auto field = [&out](long long v) {
        if (v >= 0) out << v;
    };
    for (const DistrictRecord& d : districts) {
        out << d.leaid << ',' << d.name << ',' << d.state << ',';
        field(d.agency_type);
        out << ',';
        field(d.operating_status);
        out << ',' << d.county_fips << ',';
        field(d.urban_rural);
        out << ',';
        field(d.enrollment);
        out << ',';
        field(d.school_count);
        out << '\n';
    }
}

}  // namespace modfuse
