// Acceptance gate. Runs every acceptance criterion at its stated tolerance
// and prints exactly one pass/fail line per criterion. Exits nonzero if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modfuse/inference.hpp"
#include "modfuse/params_io.hpp"
#include "modfuse/pipeline.hpp"
#include "modfuse/reporting.hpp"
#include "modfuse/synthetic.hpp"
#include "modfuse/training.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace modfuse;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict(int n, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %d [%s]: %s (%s)\n", n, name.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- criterion 1: inference vs exhaustive path enumeration ---------------

void criterion_1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20260501);
    double worst = 0.0;
    bool ok = true;
    std::string why;
    for (int k = 0; k < 200 && ok; ++k) {
        const int T = 1 + static_cast<int>(rng() % 6);
        const int S = 1 + static_cast<int>(rng() % 4);
        const ModelParameters p = oracle::random_params(rng, S);
        const ObservationSequence seq = oracle::random_sequence(rng, T, S, 0.35);
        const oracle::Enumeration e = oracle::enumerate_paths(p, seq);

        const ForwardBackwardResult fb = forward_backward(p, seq);
        worst = std::max(worst, std::abs(fb.log_likelihood - std::log(e.total_probability)));
        for (int t = 0; t < T; ++t)
            for (int i = 0; i < kNumStates; ++i)
                worst = std::max(worst, std::abs(fb.posterior[t][i] - e.posterior[t][i]));
        worst = std::max(worst,
                         std::abs(sequence_log_likelihood(p, seq) -
                                  std::log(e.total_probability)));

        const ViterbiResult vit = viterbi(p, seq);
        if (vit.path != e.best_path) {
            ok = false;
            why = fmt("instance %d: Viterbi path disagrees with enumeration argmax", k);
        }
        worst = std::max(worst,
                         std::abs(vit.log_probability - std::log(e.best_path_probability)));

        const SufficientStatistics stats = accumulate_statistics(p, seq);
        for (int i = 0; i < kNumStates; ++i) {
            worst = std::max(worst, std::abs(stats.start[i] - e.start_counts[i]));
            for (int j = 0; j < kNumStates; ++j) {
                worst = std::max(worst,
                                 std::abs(stats.transition[i][j] - e.transition_counts[i][j]));
                for (int c = 0; c < S; ++c)
                    worst = std::max(
                        worst, std::abs(stats.emissions[c][i][j] - e.emission_counts[c][i][j]));
            }
        }
    }
    const double dt = seconds_since(t0);
    if (ok && worst > 1e-9) why = fmt("max deviation %.3g exceeds 1e-9", worst);
    if (ok && dt >= 10.0) why = fmt("runtime %.1fs exceeds 10s", dt);
    ok = ok && worst <= 1e-9 && dt < 10.0;
    verdict(1, "inference oracle equivalence", ok,
            ok ? fmt("200 instances, max deviation %.2g, %.1fs", worst, dt) : why);
}

// ---- criterion 2: EM monotonicity ---------------------------------------

void criterion_2() {
    const auto t0 = Clock::now();
    GeneratorConfig gc;
    gc.n_districts = 200;
    gc.n_weeks = 12;
    gc.missingness.assign(4, {0.4});
    gc.seed = 17;
    const SyntheticCorpus corpus = generate(gc);

    TrainConfig tc;
    tc.max_iters = 8;
    tc.tolerance = 0.0;  // run every iteration; monotonicity is the point
    std::mt19937_64 rng(99);
    bool ok = true;
    std::string why;
    double worst_drop = 0.0;
    for (int r = 0; r < 50 && ok; ++r) {
        const ModelParameters init = oracle::random_params(rng, 4);
        const TrainResult res = baum_welch(corpus.sequences, init, tc);
        for (size_t i = 1; i < res.log_likelihood_trace.size(); ++i) {
            const double drop = res.log_likelihood_trace[i - 1] - res.log_likelihood_trace[i];
            worst_drop = std::max(worst_drop, drop);
            if (drop > 1e-8) {
                ok = false;
                why = fmt("restart %d: log-likelihood dropped by %.3g at iteration %zu", r,
                          drop, i);
            }
        }
    }
    const double dt = seconds_since(t0);
    if (ok && dt >= 60.0) { ok = false; why = fmt("runtime %.1fs exceeds 60s", dt); }
    verdict(2, "EM monotonicity", ok,
            ok ? fmt("50 inits x 8 iterations, worst drop %.2g, %.1fs", worst_drop, dt) : why);
}

// ---- criteria 3-5 + part of 9 share one full-scale corpus ----------------

struct ScaleRun {
    GeneratorConfig config;
    SyntheticCorpus corpus;
    ModelParameters fitted;       // label-aligned
    std::vector<PosteriorDecode> decodes;  // under the aligned parameters
};

ScaleRun g_scale;

void criterion_3() {
    const auto t0 = Clock::now();
    g_scale.config = GeneratorConfig{};  // reference parameters + calibrated missingness
    g_scale.config.n_districts = 2000;
    g_scale.config.n_weeks = 40;
    g_scale.config.seed = 2026;
    g_scale.corpus = generate(g_scale.config);

    std::mt19937_64 rng(4242);
    TrainConfig tc;  // defaults: 200 iterations, tolerance 1e-4
    TrainResult best;
    for (int r = 0; r < 2; ++r) {
        TrainResult res = baum_welch(g_scale.corpus.sequences, oracle::random_params(rng, 4), tc);
        if (r == 0 || res.log_likelihood_trace.back() > best.log_likelihood_trace.back())
            best = std::move(res);
    }

    std::vector<PosteriorDecode> raw =
        decode_all(best.params, g_scale.corpus.sequences, DecodeMode::Posterior);
    const LabelAssignment assignment = assign_labels(raw, g_scale.corpus.sequences);
    g_scale.fitted = apply_assignment(best.params, assignment);
    g_scale.decodes = decode_all(g_scale.fitted, g_scale.corpus.sequences, DecodeMode::Posterior);

    const RecoveryErrors err =
        score_recovery(g_scale.config.parameters, best.params, assignment);
    const double selfloop = g_scale.fitted.transition[2][2];
    const double dt = seconds_since(t0);

    std::string why;
    bool ok = true;
    if (err.transition > 0.05) { ok = false; why = fmt("transition error %.4f > 0.05", err.transition); }
    else if (err.max_emission > 0.07) { ok = false; why = fmt("emission error %.4f > 0.07", err.max_emission); }
    else if (std::abs(selfloop - 0.983) > 0.03) { ok = false; why = fmt("in-person self-loop %.4f outside 0.983 +/- 0.03", selfloop); }
    else if (dt >= 300.0) { ok = false; why = fmt("runtime %.0fs exceeds 300s", dt); }
    verdict(3, "parameter recovery at scale", ok,
            ok ? fmt("transition err %.4f, emission err %.4f, self-loop %.4f, %.0fs",
                     err.transition, err.max_emission, selfloop, dt)
               : why);
}

void criterion_4() {
    long long total = 0, correct = 0, hi_total = 0, hi_correct = 0;
    for (size_t d = 0; d < g_scale.decodes.size(); ++d) {
        const PosteriorDecode& dec = g_scale.decodes[d];
        const std::vector<int>& truth = g_scale.corpus.truth_paths[d];
        for (size_t t = 0; t < dec.per_week.size(); ++t) {
            const bool hit = dec.per_week[t].state == truth[t];
            ++total;
            correct += hit;
            if (dec.per_week[t].high_confidence) {
                ++hi_total;
                hi_correct += hit;
            }
        }
    }
    const double acc = static_cast<double>(correct) / total;
    const double hi_acc = hi_total > 0 ? static_cast<double>(hi_correct) / hi_total : 0.0;
    const bool ok = acc >= 0.90 && hi_total > 0 && hi_acc > acc;
    verdict(4, "decode accuracy and confidence direction", ok,
            fmt("accuracy %.4f (need >= 0.90), high-confidence %.4f on %lld weeks", acc,
                hi_acc, hi_total));
}

void criterion_5() {
    // observed weekly cells straight from the synthetic grids
    WeeklyCells cells;
    const std::vector<std::string>& sources = g_scale.config.parameters.sources;
    for (const ObservationSequence& seq : g_scale.corpus.sequences) {
        WeekIndex w = seq.start_week;
        for (int t = 0; t < seq.num_weeks; ++t, w = w.next())
            for (int c = 0; c < seq.num_sources; ++c)
                if (seq.cell(t, c) != kMissing)
                    cells[{sources[c], seq.entity_id, w}] = seq.cell(t, c);
    }
    const AgreementMatrix m = agreement_matrix(g_scale.decodes, cells, sources);
    const auto index_of = [&](const std::string& name) {
        return std::find(m.members.begin(), m.members.end(), name) - m.members.begin();
    };
    const long model = index_of(kModelMember);
    std::string detail;
    double best = -1.0, worst = 2.0;
    std::string best_src, worst_src;
    for (const std::string& src : sources) {
        const double a = m.agreement[model][index_of(src)];
        detail += fmt("%s%s=%.3f", detail.empty() ? "" : " ", src.c_str(), a);
        if (a > best) { best = a; best_src = src; }
        if (a < worst) { worst = a; worst_src = src; }
    }
    const bool ok = best_src == "R2LT" && worst_src == "MCH";
    verdict(5, "agreement ordering", ok, detail);
}

// ---- criterion 6: pipeline arithmetic at the published corpus size -------

void criterion_6() {
    const int n_districts = 14688, n_weeks = 42;
    PipelineConfig config = PipelineConfig::defaults();
    config.window_start = Date{2020, 9, 1};
    config.window_end = Date{2021, 6, 18};  // ISO weeks 2020-W36 .. 2021-W24
    const std::vector<WeekIndex> weeks = config.window_weeks();

    std::vector<DistrictRecord> eligible(n_districts);
    WeeklyCells cells;
    for (int d = 0; d < n_districts; ++d) {
        char id[8];
        std::snprintf(id, sizeof id, "%07d", d + 1);
        eligible[d].leaid = id;
        eligible[d].name = "District " + std::to_string(d + 1);
        eligible[d].agency_type = 1;
        eligible[d].operating_status = 1;
        cells[{"Burbio", id, weeks[d % weeks.size()]}] = d % kNumStates;
    }
    const BuildResult built = build_sequences(cells, eligible, config);
    const CoverageSummary cov = coverage_summary(built.sequences, config.sources);
    const bool ok = static_cast<int>(weeks.size()) == n_weeks &&
                    static_cast<int>(built.sequences.size()) == n_districts &&
                    cov.total_district_weeks == 616896;
    verdict(6, "pipeline arithmetic", ok,
            fmt("%zu weeks x %zu districts -> %lld district-weeks (want 616896)", weeks.size(),
                built.sequences.size(), cov.total_district_weeks));
}

// ---- criterion 7: t-test vs numerically integrated Student density -------

double t_density(double x, double nu, double lognorm) {
    return std::exp(lognorm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

// P(T >= t) by Simpson integration of the t density from 0 to |t|
double one_sided_p_oracle(double t, double nu) {
    const double lognorm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                           0.5 * std::log(nu * std::acos(-1.0));
    const double hi = std::abs(t);
    const int n = 200000;  // even
    const double h = hi / n;
    double sum = t_density(0.0, nu, lognorm) + t_density(hi, nu, lognorm);
    for (int i = 1; i < n; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * t_density(i * h, nu, lognorm);
    const double integral = sum * h / 3.0;
    return t >= 0.0 ? 0.5 - integral : 0.5 + integral;
}

void criterion_7() {
    std::mt19937_64 rng(777);
    double worst = 0.0;
    bool ok = true;
    std::string why;
    for (int k = 0; k < 20 && ok; ++k) {
        const size_t na = 3 + rng() % 38, nb = 3 + rng() % 38;
        std::vector<double> a(na), b(nb);
        for (double& v : a) v = oracle::uniform01(rng);
        for (double& v : b) v = 0.1 + 0.8 * oracle::uniform01(rng);
        const TTestResult r = agreement_ttest(a, b);

        // independent recomputation: plain pooled-variance formulas
        auto mean = [](const std::vector<double>& s) {
            double m = 0.0;
            for (double v : s) m += v;
            return m / s.size();
        };
        auto ss = [&](const std::vector<double>& s, double m) {
            double acc = 0.0;
            for (double v : s) acc += (v - m) * (v - m);
            return acc;
        };
        const double ma = mean(a), mb = mean(b);
        const double nu = static_cast<double>(na + nb - 2);
        const double sp2 = (ss(a, ma) + ss(b, mb)) / nu;
        const double t_ref = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
        const double p_ref = one_sided_p_oracle(t_ref, nu);

        worst = std::max(worst, std::abs(r.t - t_ref));
        worst = std::max(worst, std::abs(r.p - p_ref));
        if (worst > 1e-10) {
            ok = false;
            why = fmt("fixture %d: |t-t_ref| or |p-p_ref| = %.3g > 1e-10", k, worst);
        }
    }
    if (ok) {
        const std::vector<double> flat(6, 0.25);
        const TTestResult r = agreement_ttest(flat, flat);
        if (r.p != 0.5 || !r.degenerate) {
            ok = false;
            why = fmt("degenerate-identical samples gave p=%.6f (want exactly 0.5)", r.p);
        }
    }
    verdict(7, "statistical test oracle", ok,
            ok ? fmt("20 fixtures, max deviation %.2g; degenerate p=0.5", worst) : why);
}

// ---- criterion 8: end-to-end determinism over the CLI --------------------

int run_cli(const std::string& args) {
    const std::string cmd = "SOURCE_DATE_EPOCH=1735689600 " + std::string(MODFUSE_CLI_PATH) +
                            " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

bool run_chain(const fs::path& dir, std::string* why) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "gen.json")
        << R"({"n_districts": 150, "n_weeks": 12, "missingness": 0.3, "seed": 7})";
    struct Step {
        const char* name;
        std::string args;
    };
    const std::string sim = (dir / "sim").string(), train = (dir / "train").string(),
                      dec = (dir / "dec").string();
    const std::vector<Step> steps{
        {"simulate", "simulate --config " + (dir / "gen.json").string() + " --out " + sim},
        {"train", "train --reports " + sim + "/reports.csv --metadata " + sim +
                      "/metadata.csv --init smoothed-table --max-iters 20 --out " + train},
        {"decode", "decode --params " + train + "/params.json --reports " + sim +
                       "/reports.csv --metadata " + sim + "/metadata.csv --out " + dec},
        {"agree", "agree --decodes " + dec + "/decodes.csv --reports " + sim +
                      "/reports.csv --out " + (dir / "agree").string()},
        {"report", "report --decodes " + dec + "/decodes.csv --metadata " + sim +
                       "/metadata.csv --stratify state --snapshot-weeks 2020-11-02 --out " +
                       (dir / "report").string()},
    };
    for (const Step& s : steps) {
        const int code = run_cli(s.args + " --quiet");
        if (code != 0) {
            *why = fmt("%s exited with code %d", s.name, code);
            return false;
        }
    }
    return true;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_8() {
    const fs::path root = fs::temp_directory_path() / "modfuse_acceptance";
    const fs::path a = root / "run_a", b = root / "run_b";
    std::string why;
    bool ok = run_chain(a, &why) && run_chain(b, &why);
    int n_files = 0;
    if (ok) {
        for (auto it = fs::recursive_directory_iterator(a);
             it != fs::recursive_directory_iterator(); ++it) {
            if (!it->is_regular_file()) continue;
            const fs::path rel = fs::relative(it->path(), a);
            ++n_files;
            if (!fs::exists(b / rel) || slurp(it->path()) != slurp(b / rel)) {
                ok = false;
                why = "differs at " + rel.string();
                break;
            }
        }
    }
    verdict(8, "end-to-end determinism", ok,
            ok ? fmt("two simulate->train->decode->agree->report runs, %d files byte-identical",
                     n_files)
               : why);
}

// ---- criterion 9: trend-report normalization -----------------------------

void check_trend_rows(const std::vector<TrendRow>& rows, long long* checked, double* worst) {
    for (const TrendRow& r : rows) {
        if (r.n_districts == 0) continue;
        ++*checked;
        *worst = std::max(*worst, std::abs(r.pct[0] + r.pct[1] + r.pct[2] - 100.0));
    }
}

void criterion_9() {
    long long checked = 0;
    double worst = 0.0;
    check_trend_rows(trend_report(g_scale.decodes, g_scale.corpus.districts, Stratifier::None),
                     &checked, &worst);
    check_trend_rows(trend_report(g_scale.decodes, g_scale.corpus.districts, Stratifier::State),
                     &checked, &worst);
    check_trend_rows(
        trend_report(g_scale.decodes, g_scale.corpus.districts, Stratifier::UrbanRural),
        &checked, &worst);

    // also the rows the CLI emitted during the determinism chain
    const fs::path trends =
        fs::temp_directory_path() / "modfuse_acceptance" / "run_a" / "report" / "trends.csv";
    std::ifstream in(trends);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < 5 || f[2].empty()) continue;  // null percentages (n = 0)
        ++checked;
        worst = std::max(worst,
                         std::abs(std::stod(f[2]) + std::stod(f[3]) + std::stod(f[4]) - 100.0));
    }
    const bool ok = checked > 0 && worst <= 0.01;
    verdict(9, "trend-report normalization", ok,
            fmt("%lld rows, worst |sum-100| = %.4g", checked, worst));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
