// modfuse: fuse multi-source weekly learning-modality reports with a shared
// hidden Markov model. Subcommands: simulate | train | decode | agree | report.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modfuse/errors.hpp"
#include "modfuse/formats.hpp"
#include "modfuse/inference.hpp"
#include "modfuse/params_io.hpp"
#include "modfuse/pipeline.hpp"
#include "modfuse/reporting.hpp"
#include "modfuse/synthetic.hpp"
#include "modfuse/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modfuse;

namespace {

constexpr const char* kVersion = "0.1.0";

bool g_quiet = false;

void note(const std::string& msg) {
    if (!g_quiet) std::cerr << msg << '\n';
}

std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "' for digesting");
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        for (std::streamsize i = 0; i < in.gcount(); ++i)
            h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ULL;
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    // honor the reproducible-builds convention so identical runs can produce
    // identical manifests
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, json config,
                    const std::vector<std::string>& input_files, std::uint64_t seed) {
    json m;
    m["artifact_version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config"] = std::move(config);
    // keyed by file name, not full path, so equivalent runs rooted in
    // different directories produce identical manifests
    m["inputs"] = json::object();
    for (const std::string& f : input_files)
        m["inputs"][fs::path(f).filename().string()] = fnv1a_digest(f);
    m["seed"] = seed;
    m["created_utc"] = utc_timestamp();
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    if (!out) throw InputError("cannot write manifest in '" + out_dir.string() + "'");
    out << m.dump(2) << '\n';
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw InputError("cannot create output directory '" + out + "': " + ec.message());
}

template <typename T>
void write_file(const fs::path& path, T&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    writer(out);
}

// --- shared pipeline front end ------------------------------------------

struct PipelineInputs {
    PipelineConfig config;
    std::vector<DistrictRecord> eligible;
    std::vector<Exclusion> exclusions;
    std::vector<ObservationSequence> sequences;
    std::vector<std::string> unknown_leaids;
    CoverageSummary coverage;
    WeeklyCells cells;
};

PipelineInputs run_pipeline(const std::string& reports_path, const std::string& metadata_path,
                            const std::string& config_path, const std::string& cutoff_date) {
    PipelineInputs in;
    in.config = config_path.empty() ? PipelineConfig::defaults()
                                    : load_pipeline_config(config_path);
    std::vector<Exclusion> unparseable;
    const std::vector<DistrictRecord> districts =
        load_districts_file(metadata_path, unparseable);
    FilterResult filtered = filter_eligible(districts, in.config.exclusion_keywords);
    in.eligible = std::move(filtered.eligible);
    in.exclusions = std::move(unparseable);
    in.exclusions.insert(in.exclusions.end(), filtered.excluded.begin(), filtered.excluded.end());

    std::vector<RawReport> reports = load_reports_file(reports_path, in.config);
    if (!cutoff_date.empty()) {
        const Date cutoff = Date::parse(cutoff_date);
        std::erase_if(reports, [&](const RawReport& r) { return cutoff < r.report_date; });
    }
    long long dropped = 0;
    in.cells = aggregate_to_weeks(reports, in.config, &dropped);
    if (dropped > 0) note("dropped " + std::to_string(dropped) + " reports outside the study window");

    BuildResult built = build_sequences(in.cells, in.eligible, in.config);
    in.sequences = std::move(built.sequences);
    in.unknown_leaids = std::move(built.unknown_leaids);
    for (const std::string& id : in.unknown_leaids)
        note("warning: district '" + id + "' has reports but no metadata; excluded");
    in.coverage = coverage_summary(in.sequences, in.config.sources);
    return in;
}

json config_json_of(const PipelineConfig& cfg) {
    json j;
    j["window_start"] = cfg.window_start.to_string();
    j["window_end"] = cfg.window_end.to_string();
    j["sources"] = cfg.sources;
    return j;
}

// --- subcommands ---------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out,
                 std::uint64_t seed, bool seed_given) {
    GeneratorConfig cfg =
        config_path.empty() ? GeneratorConfig{} : load_generator_config(config_path);
    if (seed_given) cfg.seed = seed;
    ensure_out_dir(out);
    const SyntheticCorpus corpus = generate(cfg);
    const fs::path dir(out);
    write_file(dir / "reports.csv",
               [&](std::ostream& o) { write_reports(o, corpus.sequences, cfg.parameters.sources); });
    write_file(dir / "metadata.csv", [&](std::ostream& o) { write_districts(o, corpus.districts); });
    write_file(dir / "truth.csv",
               [&](std::ostream& o) { write_truth(o, corpus.sequences, corpus.truth_paths); });
    save_params(cfg.parameters, (dir / "true_params.json").string());

    const CoverageSummary cov = coverage_summary(corpus.sequences, cfg.parameters.sources);
    json jc;
    jc["n_districts"] = cfg.n_districts;
    jc["n_weeks"] = cfg.n_weeks;
    jc["start_week"] = cfg.start_week.week_start().to_string();
    jc["sources"] = cfg.parameters.sources;
    jc["missingness"] = cfg.missingness;
    jc["coverage"] = json::object();
    for (const SourceCoverage& s : cov.per_source) jc["coverage"][s.source] = s.district_weeks;
    jc["total_district_weeks"] =
        static_cast<long long>(cfg.n_districts) * static_cast<long long>(cfg.n_weeks);
    std::vector<std::string> inputs;
    if (!config_path.empty()) inputs.push_back(config_path);
    write_manifest(dir, "simulate", jc, inputs, cfg.seed);
    note("wrote synthetic corpus for " + std::to_string(cfg.n_districts) + " districts to " + out);
    return 0;
}

ModelParameters random_init(const std::vector<std::string>& sources, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed));
    auto random_row = [&rng]() {
        Vec3 row;
        double total = 0.0;
        for (double& v : row) {
            v = 0.2 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
            total += v;
        }
        for (double& v : row) v /= total;
        return row;
    };
    ModelParameters p;
    p.sources = sources;
    p.initial = random_row();
    for (int i = 0; i < kNumStates; ++i) p.transition[i] = random_row();
    for (size_t c = 0; c < sources.size(); ++c)
        p.emissions.push_back({random_row(), random_row(), random_row()});
    return p;
}

ModelParameters smoothed_table_init(const std::vector<std::string>& sources) {
    const ModelParameters ref = reference_parameters();
    if (sources.size() != ref.sources.size())
        throw InputError("--init smoothed-table expects " + std::to_string(ref.sources.size()) +
                         " sources; configure --init random for other channel counts");
    auto blend = [](Vec3 row) {
        for (double& v : row) v = 0.9 * v + 0.1 / kNumStates;
        return row;
    };
    ModelParameters p = ref;
    p.sources = sources;
    p.initial = blend(p.initial);
    for (int i = 0; i < kNumStates; ++i) p.transition[i] = blend(p.transition[i]);
    for (Mat3& em : p.emissions)
        for (int i = 0; i < kNumStates; ++i) em[i] = blend(em[i]);
    return p;
}

int cmd_train(const std::string& reports, const std::string& metadata,
              const std::string& config_path, const std::string& out,
              const std::string& cutoff, const std::string& init_mode,
              const std::string& init_file, std::uint64_t seed, int max_iters, double tol,
              double pseudocount, int restarts) {
    PipelineInputs in = run_pipeline(reports, metadata, config_path, cutoff);
    if (in.sequences.empty())
        throw InputError("no eligible districts with observations; nothing to train on");
    ensure_out_dir(out);

    TrainConfig tc;
    tc.max_iters = max_iters;
    tc.tolerance = tol;
    tc.pseudocount = pseudocount;

    std::vector<ModelParameters> inits;
    if (init_mode == "random") {
        if (restarts < 1) throw InputError("--restarts must be >= 1");
        for (int r = 0; r < restarts; ++r)
            inits.push_back(random_init(in.config.sources, seed + static_cast<std::uint64_t>(r)));
    } else if (init_mode == "smoothed-table") {
        inits.push_back(smoothed_table_init(in.config.sources));
    } else if (init_mode == "file") {
        if (init_file.empty()) throw InputError("--init file requires --init-file PATH");
        ModelParameters p = load_params(init_file);
        if (p.sources != in.config.sources)
            throw InputError("channel order in '" + init_file +
                             "' does not match the pipeline source order");
        inits.push_back(std::move(p));
    } else {
        throw InputError("unknown --init mode '" + init_mode + "'");
    }

    TrainResult best;
    bool have = false;
    for (size_t r = 0; r < inits.size(); ++r) {
        TrainResult res = baum_welch(in.sequences, inits[r], tc);
        const double ll = res.log_likelihood_trace.empty()
                              ? 0.0
                              : res.log_likelihood_trace.back();
        note("restart " + std::to_string(r) + ": final log-likelihood " + std::to_string(ll));
        if (!have || (!res.log_likelihood_trace.empty() &&
                      (best.log_likelihood_trace.empty() ||
                       ll > best.log_likelihood_trace.back()))) {
            best = std::move(res);
            have = true;
        }
    }

    // anchor unsupervised clusters to modality labels before saving
    if (!best.log_likelihood_trace.empty()) {
        const std::vector<PosteriorDecode> decodes =
            decode_all(best.params, in.sequences, DecodeMode::Posterior);
        const LabelAssignment assignment = assign_labels(decodes, in.sequences);
        best.params = apply_assignment(best.params, assignment);
    }

    const fs::path dir(out);
    save_params(best.params, (dir / "params.json").string());
    write_file(dir / "likelihood_trace.csv", [&](std::ostream& o) {
        o << "iteration,log_likelihood\n";
        char buf[40];
        for (size_t i = 0; i < best.log_likelihood_trace.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.10f\n", i, best.log_likelihood_trace[i]);
            o << buf;
        }
    });
    write_file(dir / "coverage.csv", [&](std::ostream& o) { write_coverage(o, in.coverage); });
    write_file(dir / "exclusions.csv", [&](std::ostream& o) {
        o << "leaid,reason\n";
        for (const Exclusion& e : in.exclusions) o << e.leaid << ',' << e.reason << '\n';
    });

    json jc = config_json_of(in.config);
    jc["init"] = init_mode;
    jc["max_iters"] = max_iters;
    jc["tolerance"] = tol;
    jc["pseudocount"] = pseudocount;
    jc["restarts"] = restarts;
    if (!cutoff.empty()) jc["cutoff_date"] = cutoff;
    jc["iterations_run"] = best.log_likelihood_trace.size();
    std::vector<std::string> inputs{reports, metadata};
    if (!config_path.empty()) inputs.push_back(config_path);
    if (!init_file.empty()) inputs.push_back(init_file);
    write_manifest(dir, "train", jc, inputs, seed);
    return 0;
}

int cmd_decode(const std::string& params_path, const std::string& reports,
               const std::string& metadata, const std::string& config_path,
               const std::string& out, const std::string& cutoff, const std::string& mode,
               double threshold) {
    PipelineInputs in = run_pipeline(reports, metadata, config_path, cutoff);
    const ModelParameters params = load_params(params_path);
    if (params.sources != in.config.sources)
        throw InputError("channel order in '" + params_path +
                         "' does not match the pipeline source order");
    const DecodeMode dm = mode == "viterbi" ? DecodeMode::Viterbi : DecodeMode::Posterior;
    if (mode != "viterbi" && mode != "posterior")
        throw InputError("--mode must be 'posterior' or 'viterbi'");
    ensure_out_dir(out);
    const std::vector<PosteriorDecode> decodes = decode_all(params, in.sequences, dm, threshold);
    const fs::path dir(out);
    write_decodes_file((dir / "decodes.csv").string(), decodes);

    long long total = 0, high = 0;
    for (const PosteriorDecode& d : decodes)
        for (const WeekDecode& w : d.per_week) {
            ++total;
            if (w.high_confidence) ++high;
        }
    json jc = config_json_of(in.config);
    jc["mode"] = mode;
    jc["threshold"] = threshold;
    jc["decoded_district_weeks"] = total;
    jc["high_confidence_district_weeks"] = high;
    write_manifest(dir, "decode", jc, {params_path, reports, metadata}, 0);
    note("decoded " + std::to_string(total) + " district-weeks (" + std::to_string(high) +
         " high-confidence)");
    return 0;
}

int cmd_agree(const std::string& decodes_path, const std::string& reports,
              const std::string& config_path, const std::string& out,
              const std::string& unit_name) {
    const PipelineConfig config = config_path.empty() ? PipelineConfig::defaults()
                                                      : load_pipeline_config(config_path);
    if (unit_name != "district" && unit_name != "week")
        throw InputError("--unit must be 'district' or 'week'");
    const AgreementUnit unit =
        unit_name == "week" ? AgreementUnit::Week : AgreementUnit::District;
    const std::vector<PosteriorDecode> decodes = load_decodes_file(decodes_path);
    const std::vector<RawReport> raw = load_reports_file(reports, config);
    const WeeklyCells cells = aggregate_to_weeks(raw, config);
    ensure_out_dir(out);
    const fs::path dir(out);

    const AgreementMatrix matrix = agreement_matrix(decodes, cells, config.sources);
    write_file(dir / "agreement_matrix.csv",
               [&](std::ostream& o) { write_agreement_matrix(o, matrix); });
    write_file(dir / "agreement_pairs.csv",
               [&](std::ostream& o) { write_agreement_pairs(o, matrix); });

    write_file(dir / "ttest.csv", [&](std::ostream& o) {
        o << "source,n_vs_model,n_vs_others,t,p_one_sided,degenerate\n";
        for (const std::string& src : config.sources) {
            const AgreementSamples s = agreement_samples(src, decodes, cells, config.sources, unit);
            o << src << ',' << s.versus_model.size() << ',' << s.versus_others.size() << ',';
            try {
                const TTestResult r = agreement_ttest(s.versus_model, s.versus_others);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.6f,%.6g,%d", r.t, r.p, r.degenerate ? 1 : 0);
                o << buf;
            } catch (const InputError&) {
                o << ",,";  // insufficient overlap for this source
            }
            o << '\n';
        }
    });

    json jc;
    jc["sources"] = config.sources;
    jc["unit"] = unit_name;
    std::vector<std::string> inputs{decodes_path, reports};
    if (!config_path.empty()) inputs.push_back(config_path);
    write_manifest(dir, "agree", jc, inputs, 0);
    return 0;
}

int cmd_report(const std::string& decodes_path, const std::string& metadata,
               const std::string& out, const std::string& stratify,
               const std::string& snapshot_weeks) {
    Stratifier strat;
    if (stratify == "none") strat = Stratifier::None;
    else if (stratify == "state") strat = Stratifier::State;
    else if (stratify == "urban_rural") strat = Stratifier::UrbanRural;
    else throw InputError("--stratify must be one of none|state|urban_rural");

    const std::vector<PosteriorDecode> decodes = load_decodes_file(decodes_path);
    std::vector<Exclusion> unparseable;
    const std::vector<DistrictRecord> districts = load_districts_file(metadata, unparseable);

    if (strat == Stratifier::UrbanRural) {
        std::set<std::string> with_class;
        for (const DistrictRecord& d : districts)
            if (d.urban_rural != -1) with_class.insert(d.leaid);
        std::vector<std::string> missing;
        for (const PosteriorDecode& d : decodes)
            if (!with_class.count(d.entity_id)) missing.push_back(d.entity_id);
        if (!missing.empty()) {
            std::string msg = "urban-rural class missing for " +
                              std::to_string(missing.size()) + " decoded district(s):";
            for (size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
            if (missing.size() > 20) msg += " ...";
            throw InputError(msg);
        }
    }

    ensure_out_dir(out);
    const fs::path dir(out);
    const std::vector<TrendRow> trends = trend_report(decodes, districts, strat);
    write_file(dir / "trends.csv", [&](std::ostream& o) { write_trend_rows(o, trends); });

    if (!snapshot_weeks.empty()) {
        std::vector<WeekIndex> weeks;
        std::stringstream ss(snapshot_weeks);
        std::string tok;
        while (std::getline(ss, tok, ','))
            weeks.push_back(WeekIndex::of(Date::parse(tok)));
        const std::vector<SnapshotRow> rows = state_snapshot(decodes, districts, weeks);
        write_file(dir / "snapshot.csv", [&](std::ostream& o) { write_snapshot_rows(o, rows); });
    }

    json jc;
    jc["stratify"] = stratify;
    if (!snapshot_weeks.empty()) jc["snapshot_weeks"] = snapshot_weeks;
    write_manifest(dir, "report", jc, {decodes_path, metadata}, 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source learning-modality fusion with a shared hidden Markov model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "Configuration document (JSON)")->configurable(false);
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--quiet", g_quiet, "Suppress progress messages");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    app.fallthrough();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic corpus from known parameters");

    // train
    auto* train = app.add_subcommand("train", "Fit HMM parameters with Baum-Welch");
    std::string reports, metadata, cutoff, init_mode = "random", init_file;
    int max_iters = 200, restarts = 3;
    double tol = 1e-4, pseudocount = 1e-6, threshold = 0.75;
    train->add_option("--reports", reports, "Reports file")->required();
    train->add_option("--metadata", metadata, "District metadata file")->required();
    train->add_option("--cutoff-date", cutoff, "Ignore reports after this date (YYYY-MM-DD)");
    train->add_option("--init", init_mode, "Initialization: random|smoothed-table|file");
    train->add_option("--init-file", init_file, "Parameter file for --init file");
    train->add_option("--max-iters", max_iters, "Maximum EM iterations")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--tol", tol, "Log-likelihood convergence tolerance");
    train->add_option("--pseudocount", pseudocount, "M-step pseudocount");
    train->add_option("--restarts", restarts, "Random restarts (best likelihood wins)");

    // decode
    auto* decode = app.add_subcommand("decode", "Decode per-district weekly modalities");
    std::string params_path, mode = "posterior";
    decode->add_option("--params", params_path, "Parameter file")->required();
    decode->add_option("--reports", reports, "Reports file")->required();
    decode->add_option("--metadata", metadata, "District metadata file")->required();
    decode->add_option("--cutoff-date", cutoff, "Ignore reports after this date");
    decode->add_option("--mode", mode, "posterior|viterbi");
    decode->add_option("--threshold", threshold, "High-confidence posterior threshold");

    // agree
    auto* agree = app.add_subcommand("agree", "Pairwise agreement and significance tests");
    std::string decodes_path, unit = "district";
    agree->add_option("--decodes", decodes_path, "Decode output file")->required();
    agree->add_option("--reports", reports, "Reports file")->required();
    agree->add_option("--unit", unit, "t-test unit of analysis: district|week");

    // report
    auto* report = app.add_subcommand("report", "Trend and geographic summaries");
    std::string stratify = "none", snapshot_weeks;
    report->add_option("--decodes", decodes_path, "Decode output file")->required();
    report->add_option("--metadata", metadata, "District metadata file")->required();
    report->add_option("--stratify", stratify, "none|state|urban_rural");
    report->add_option("--snapshot-weeks", snapshot_weeks,
                       "Comma-separated dates for per-state snapshots");

    try {
        app.parse(argc, argv);
        if (sim->parsed())
            return cmd_simulate(config_path, out_dir, seed, seed_opt->count() > 0);
        if (train->parsed())
            return cmd_train(reports, metadata, config_path, out_dir, cutoff, init_mode,
                             init_file, seed, max_iters, tol, pseudocount, restarts);
        if (decode->parsed())
            return cmd_decode(params_path, reports, metadata, config_path, out_dir, cutoff, mode,
                              threshold);
        if (agree->parsed())
            return cmd_agree(decodes_path, reports, config_path, out_dir, unit);
        if (report->parsed())
            return cmd_report(decodes_path, metadata, out_dir, stratify, snapshot_weeks);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
