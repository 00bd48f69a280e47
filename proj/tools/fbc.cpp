// fbc: simulate, train, classify and benchmark functional copula classifiers.

#include "fbc/classifiers.hpp"
#include "fbc/error.hpp"
#include "fbc/experiment.hpp"
#include "fbc/io.hpp"
#include "fbc/plan.hpp"
#include "fbc/simgen.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fbc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::size_t default_workers() {
    if (const char* env = std::getenv("FBC_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return 1;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
    std::optional<std::size_t> n_train, n_test, grid_points, J_gen;
    std::optional<double> noise_sd;
    std::optional<std::uint64_t> seed;
    fs::path out = ".";
};

int run_simulate(const SimulateArgs& a) {
    ScenarioConfig c;
    if (a.scenario.size() == 4 && !fs::exists(a.scenario)) {
        c = ScenarioConfig::from_label(a.scenario);
    } else if (fs::exists(a.scenario)) {
        c = load_scenario_config(a.scenario);
    } else {
        c = ScenarioConfig::from_label(a.scenario);  // reports the valid codes
    }
    if (a.n_train) c.n_train = *a.n_train;
    if (a.n_test) c.n_test = *a.n_test;
    if (a.grid_points) c.grid_points = *a.grid_points;
    if (a.J_gen) c.J_gen = *a.J_gen;
    if (a.noise_sd) c.noise_sd = *a.noise_sd;
    if (a.seed) c.seed = *a.seed;
    const GeneratedData data = generate(c);
    fs::create_directories(a.out);
    write_curve_csv(a.out / "train.csv", data.train);
    write_curve_csv(a.out / "test.csv", data.test);
    open_out(a.out / "manifest.json") << scenario_config_json(c);
    std::cout << "wrote " << (a.out / "train.csv").string() << " (" << data.train.size() << " curves) and "
              << (a.out / "test.csv").string() << " (" << data.test.size() << " curves), scenario " << c.label() << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string method;
    fs::path data;
    std::optional<std::size_t> J;
    std::string J_range;
    std::size_t folds = 10;
    std::string rank_corr = "tau";
    std::vector<double> presmooth;
    bool presmooth_set = false;
    std::uint64_t seed = 0;
    fs::path model;
};

JRange parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParameterError("--J-range expects a:b, got '" + text + "'");
    try {
        return JRange{std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ParameterError("--J-range expects a:b, got '" + text + "'");
    }
}

RankMethod parse_rank(const std::string& s) {
    if (s == "tau" || s == "kendall") return RankMethod::KendallTau;
    if (s == "rho" || s == "spearman") return RankMethod::SpearmanRho;
    throw ParameterError("--rank-corr expects tau or rho, got '" + s + "'");
}

int run_train(const TrainArgs& a) {
    ClassifierSpec spec;
    spec.method = parse_method(a.method);
    spec.rank_method = parse_rank(a.rank_corr);
    spec.folds = a.folds;
    if (a.J && !a.J_range.empty()) throw ParameterError("give either --J or --J-range, not both");
    if (a.J) {
        spec.J = *a.J;
    } else if (!a.J_range.empty()) {
        spec.J = parse_range(a.J_range);
    } else {
        spec = ClassifierSpec::with_default_range(spec.method);
        spec.rank_method = parse_rank(a.rank_corr);
        spec.folds = a.folds;
    }
    FunctionalDataset data = read_curve_csv(a.data).dataset();
    if (spec.method == Method::CEN && data.num_groups() != 2) {
        throw ParameterError("cen (functional centroid) is a two-group classifier and is not applicable to " +
                             std::to_string(data.num_groups()) + "-group data");
    }
    std::optional<double> bw;
    if (a.presmooth_set) {
        bw = a.presmooth.empty() ? default_presmooth_bandwidth(data.grid()) : a.presmooth.front();
        data = presmooth(data, *bw).data;
    }
    const ClassifierSpec normalized = spec.normalized();
    if (const auto* r = std::get_if<JRange>(&spec.J); r && r->min != std::get<JRange>(normalized.J).min) {
        std::cout << "J range lower bound raised to " << std::get<JRange>(normalized.J).min << " for copula method "
                  << method_key(spec.method) << "\n";
    }
    CvTrained result = train_with_cv(normalized, data, CounterRng(a.seed).split(stream::folds));
    result.model.presmooth_bandwidth = bw;
    if (result.cv) {
        std::cout << "J,cv_error\n";
        for (std::size_t i = 0; i < result.cv->candidates.size(); ++i) {
            std::cout << result.cv->candidates[i] << ','
                      << (result.cv->feasible[i] ? format_double(result.cv->errors[i]) : std::string("infeasible")) << '\n';
        }
    }
    std::cout << "selected J* = " << result.model.J << "\n";
    if (!a.model.empty()) {
        if (a.model.has_parent_path()) fs::create_directories(a.model.parent_path());
        save_model(a.model, result.model);
        std::cout << "model written to " << a.model.string() << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
    fs::path model, data, out;
    bool scores = false;
};

int run_classify(const ClassifyArgs& a) {
    const TrainedModel model = load_model(a.model);
    const CurveFile file = read_curve_csv(a.data);
    const Grid& mg = model.basis().grid;
    if (!file.grid.matches(mg)) {
        throw DataError("data grid (" + std::to_string(file.grid.size()) + " points on [" + format_double(file.grid.front()) +
                        ", " + format_double(file.grid.back()) + "]) does not match the model grid (" +
                        std::to_string(mg.size()) + " points on [" + format_double(mg.front()) + ", " +
                        format_double(mg.back()) + "])");
    }
    std::ofstream out = open_out(a.out);
    out << "label";
    if (a.scores) {
        for (std::size_t k = 0; k < model.num_groups; ++k) out << ",score_" << k;
    }
    out << '\n';
    if (file.curves.rows() == 0) return kOk;
    const Matrix scores = log_posterior_ratios(model, file.curves, file.grid);
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        out << decide(model.method, scores.row(i).transpose());
        if (a.scores) {
            for (Eigen::Index k = 0; k < scores.cols(); ++k) out << ',' << format_double(scores(i, k));
        }
        out << '\n';
    }
    if (file.labels) {
        std::vector<int> pred(static_cast<std::size_t>(scores.rows()));
        for (Eigen::Index i = 0; i < scores.rows(); ++i) pred[static_cast<std::size_t>(i)] = decide(model.method, scores.row(i).transpose());
        std::cout << "error rate " << format_double(error_rate(pred, *file.labels)) << " on " << pred.size() << " labelled curves\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
    fs::path plan, out, text, long_out;
    std::optional<std::size_t> reps, workers;
    std::optional<std::uint64_t> seed;
};

void write_outputs(const BenchmarkReport& report, const fs::path& out, const fs::path& text, const fs::path& long_out) {
    if (!out.empty()) {
        auto f = open_out(out);
        write_report_csv(f, report);
    }
    if (!text.empty()) {
        auto f = open_out(text);
        write_report_text(f, report);
    }
    if (!long_out.empty()) {
        auto f = open_out(long_out);
        write_report_long_csv(f, report);
    }
    write_report_text(std::cout, report);
}

int report_failures(const BenchmarkReport& report) {
    if (report.failed_cells() == 0) return kOk;
    std::cerr << report.failed_cells() << " cell(s) had failed repetitions:\n";
    for (std::size_t s = 0; s < report.scenarios.size(); ++s) {
        for (std::size_t m = 0; m < report.methods.size(); ++m) {
            const auto& f = report.cells[s][m].failures;
            if (f.empty()) continue;
            std::cerr << "  " << report.scenarios[s] << " / " << report.methods[m] << ": " << f.size() << " failed, first: " << f.front() << "\n";
        }
    }
    return kNumerical;
}

int run_benchmark(const BenchmarkArgs& a) {
    ExperimentPlan plan = load_plan(a.plan);
    if (a.reps) plan.repetitions = *a.reps;
    plan.workers = a.workers ? *a.workers : default_workers();
    if (a.seed) plan.seed = *a.seed;
    const BenchmarkReport report = run(plan);
    write_outputs(report, a.out, a.text, a.long_out);
    return report_failures(report);
}

struct CvEvalArgs {
    fs::path data, out, text, long_out;
    std::vector<std::string> methods;
    std::size_t reps = 20, folds = 10, j_max = 30;
    std::optional<std::size_t> workers;
    std::uint64_t seed = 0;
    std::vector<double> presmooth;
    bool presmooth_set = false;
};

int run_cv_evaluate(const CvEvalArgs& a) {
    FunctionalDataset data = read_curve_csv(a.data).dataset();
    if (a.presmooth_set) {
        data = presmooth(data, a.presmooth.empty() ? default_presmooth_bandwidth(data.grid()) : a.presmooth.front()).data;
    }
    std::vector<ClassifierSpec> specs;
    std::vector<std::string> names = a.methods;
    if (names.empty() || (names.size() == 1 && names.front() == "all")) {
        names.clear();
        for (Method m : kAllMethods) {
            if (m == Method::CEN && data.num_groups() != 2) continue;
            names.emplace_back(method_key(m));
        }
    }
    for (const auto& n : names) {
        ClassifierSpec s = ClassifierSpec::with_default_range(parse_method(n), a.j_max);
        s.folds = a.folds;
        specs.push_back(s);
    }
    const BenchmarkReport report = repeated_cv_evaluate(data, specs, a.reps, a.folds, a.seed,
                                                        a.workers ? *a.workers : default_workers(), a.data.stem().string());
    write_outputs(report, a.out, a.text, a.long_out);
    return report_failures(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Copula-based functional Bayes classifiers: simulate, train, classify, benchmark"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "fbc 0.1.0");

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Generate a scenario's train/test curves");
    cmd_sim->add_option("--scenario", sim.scenario, "Label such as RSDN or MDSN, or a TOML/JSON scenario file")->required();
    cmd_sim->add_option("--n-train", sim.n_train, "Training curves (default 100)");
    cmd_sim->add_option("--n-test", sim.n_test, "Test curves (default 150)");
    cmd_sim->add_option("--grid-points", sim.grid_points, "Observation grid size (default 51)");
    cmd_sim->add_option("--J-gen", sim.J_gen, "Generating components (default 201)");
    cmd_sim->add_option("--noise-sd", sim.noise_sd, "Observation noise sd (default 0.5)");
    cmd_sim->add_option("--seed", sim.seed, "Random seed (default 0)");
    cmd_sim->add_option("--out", sim.out, "Output directory")->capture_default_str();

    TrainArgs tr;
    auto* cmd_train = app.add_subcommand("train", "Fit a classifier, selecting J by cross-validation when given a range");
    cmd_train->add_option("--method", tr.method, "bc, bcg, bcg-pls, bct, bct-pls, cen, plsda or logistic")->required();
    cmd_train->add_option("--data", tr.data, "Training CSV")->required();
    cmd_train->add_option("--J", tr.J, "Fixed number of components");
    cmd_train->add_option("--J-range", tr.J_range, "Candidate range a:b for cross-validation (default 1:30, 2:30 with copulas)");
    cmd_train->add_option("--folds", tr.folds, "Cross-validation folds")->capture_default_str();
    cmd_train->add_option("--rank-corr", tr.rank_corr, "tau or rho")->capture_default_str();
    auto* tr_smooth = cmd_train->add_option("--presmooth", tr.presmooth, "Pre-smooth curves; optional bandwidth (default 5 grid spacings)")->expected(0, 1);
    cmd_train->add_option("--seed", tr.seed, "Seed for the fold split")->capture_default_str();
    cmd_train->add_option("--model", tr.model, "Output model JSON");

    ClassifyArgs cl;
    auto* cmd_cls = app.add_subcommand("classify", "Predict labels with a saved model");
    cmd_cls->add_option("--model", cl.model, "Model JSON")->required();
    cmd_cls->add_option("--data", cl.data, "Curves CSV (label column optional)")->required();
    cmd_cls->add_option("--out", cl.out, "Predictions CSV")->required();
    cmd_cls->add_flag("--scores", cl.scores, "Also write per-group log-posterior scores");

    BenchmarkArgs bm;
    auto* cmd_bm = app.add_subcommand("benchmark", "Run a Monte-Carlo benchmark plan");
    cmd_bm->add_option("--plan", bm.plan, "Plan file (TOML or JSON)")->required();
    cmd_bm->add_option("--reps", bm.reps, "Override the plan's repetitions");
    cmd_bm->add_option("--workers", bm.workers, "Worker threads (default $FBC_WORKERS or 1)");
    cmd_bm->add_option("--seed", bm.seed, "Override the plan's seed");
    cmd_bm->add_option("--out", bm.out, "Report CSV");
    cmd_bm->add_option("--text", bm.text, "Aligned text table");
    cmd_bm->add_option("--long", bm.long_out, "Long-format per-repetition CSV");

    CvEvalArgs cv;
    auto* cmd_cv = app.add_subcommand("cv-evaluate", "Repeated stratified k-fold CV of several methods on one dataset");
    cmd_cv->add_option("--data", cv.data, "Labelled curves CSV")->required();
    cmd_cv->add_option("--methods", cv.methods, "Methods (default: all applicable)")->delimiter(',');
    cmd_cv->add_option("--reps", cv.reps, "Repetitions")->capture_default_str();
    cmd_cv->add_option("--folds", cv.folds, "Folds per repetition")->capture_default_str();
    cmd_cv->add_option("--J-max", cv.j_max, "Largest candidate J")->capture_default_str();
    cmd_cv->add_option("--workers", cv.workers, "Worker threads (default $FBC_WORKERS or 1)");
    cmd_cv->add_option("--seed", cv.seed, "Random seed")->capture_default_str();
    auto* cv_smooth = cmd_cv->add_option("--presmooth", cv.presmooth, "Pre-smooth curves; optional bandwidth")->expected(0, 1);
    cmd_cv->add_option("--out", cv.out, "Report CSV");
    cmd_cv->add_option("--text", cv.text, "Aligned text table");
    cmd_cv->add_option("--long", cv.long_out, "Long-format per-repetition CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    tr.presmooth_set = tr_smooth->count() > 0;
    cv.presmooth_set = cv_smooth->count() > 0;

    try {
        if (cmd_sim->parsed()) return run_simulate(sim);
        if (cmd_train->parsed()) return run_train(tr);
        if (cmd_cls->parsed()) return run_classify(cl);
        if (cmd_bm->parsed()) return run_benchmark(bm);
        if (cmd_cv->parsed()) return run_cv_evaluate(cv);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}
