#include "fbc/experiment.hpp"

#include "fbc/error.hpp"
#include "fbc/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

namespace fbc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

double quantile7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct MethodOutcome {
    double error = kNaN;
    double cv_error = kNaN;
    std::size_t J = 0;
    std::string failure;
};

/// Picks the method with the lowest CV error; ties go to the earlier Method,
/// then to the earlier list entry.
std::optional<std::size_t> cv_choice(const std::vector<ClassifierSpec>& methods, const std::vector<MethodOutcome>& out) {
    std::optional<std::size_t> best;
    for (std::size_t m = 0; m < out.size(); ++m) {
        if (!std::isfinite(out[m].cv_error) || !std::isfinite(out[m].error)) continue;
        if (!best || out[m].cv_error < out[*best].cv_error ||
            (out[m].cv_error == out[*best].cv_error && methods[m].method < methods[*best].method)) {
            best = m;
        }
    }
    return best;
}

MethodOutcome evaluate_split(const ClassifierSpec& spec, const FunctionalDataset& train_set, const FunctionalDataset& test_set,
                             CounterRng folds_rng) {
    MethodOutcome out;
    try {
        const CvResult cv = select_J_cv(spec, train_set, folds_rng);
        ClassifierSpec fixed = spec;
        fixed.J = cv.best_J;
        const TrainedModel model = train(fixed, train_set);
        out.error = error_rate(classify(model, test_set.curves(), test_set.grid()), test_set.labels());
        out.cv_error = cv.best_error;
        out.J = cv.best_J;
    } catch (const std::exception& e) {
        out = MethodOutcome{};
        out.failure = e.what();
    }
    return out;
}

MethodOutcome evaluate_cv(const ClassifierSpec& spec, const FunctionalDataset& data,
                          const std::vector<std::vector<std::size_t>>& folds) {
    MethodOutcome out;
    try {
        const CvResult cv = select_J_cv(spec, data, folds);
        out.error = cv.best_error;
        out.cv_error = cv.best_error;
        out.J = cv.best_J;
    } catch (const std::exception& e) {
        out = MethodOutcome{};
        out.failure = e.what();
    }
    return out;
}

struct Grid3 {
    // [scenario][repetition][method]
    std::vector<std::vector<std::vector<MethodOutcome>>> outcomes;
};

BenchmarkReport assemble(std::vector<std::string> scenarios, const std::vector<ClassifierSpec>& methods,
                         std::size_t reps, bool cv_select, const Grid3& g, const std::vector<std::string>& scenario_failure) {
    BenchmarkReport report;
    report.scenarios = std::move(scenarios);
    for (const auto& s : methods) report.methods.emplace_back(method_label(s.method));
    report.repetitions = reps;
    report.cv_select = cv_select;
    const std::size_t S = report.scenarios.size();
    const std::size_t M = methods.size();
    report.cells.assign(S, std::vector<CellResult>(M));
    report.summaries.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        ScenarioSummary& sum = report.summaries[s];
        for (std::size_t m = 0; m < M; ++m) {
            CellResult& cell = report.cells[s][m];
            for (std::size_t r = 0; r < reps; ++r) {
                const MethodOutcome& o = g.outcomes[s][r][m];
                cell.errors.push_back(o.error);
                cell.J.push_back(o.J);
                if (!std::isfinite(o.error)) {
                    const std::string& why = o.failure.empty() ? scenario_failure[s] : o.failure;
                    cell.failures.push_back("repetition " + std::to_string(r) + ": " + why);
                }
            }
            summarize_cell(cell);
        }
        for (std::size_t r = 0; r < reps; ++r) {
            const auto choice = cv_choice(methods, g.outcomes[s][r]);
            sum.cv_choice.push_back(choice ? *choice : M);
            sum.cv.errors.push_back(choice ? g.outcomes[s][r][*choice].error : kNaN);
            sum.cv.J.push_back(choice ? g.outcomes[s][r][*choice].J : 0);
            if (!choice) sum.cv.failures.push_back("repetition " + std::to_string(r) + ": no method succeeded");
        }
        summarize_cell(sum.cv);
        for (std::size_t m = 0; m < M; ++m) {
            const CellResult& c = report.cells[s][m];
            if (c.succeeded == 0) continue;
            if (!sum.best || c.mean < report.cells[s][*sum.best].mean) sum.best = m;
        }
        if (sum.best) {
            const CellResult& b = report.cells[s][*sum.best];
            for (std::size_t m = 0; m < M; ++m) {
                const CellResult& c = report.cells[s][m];
                if (c.succeeded > 0 && c.mean <= b.mean + b.moe) sum.within_moe.push_back(m);
            }
            sum.ratio_cv = b.mean > 0.0 ? (sum.cv.mean - b.mean) / b.mean : 0.0;
        }
    }
    return report;
}

}  // namespace

void ExperimentPlan::validate() const {
    if (repetitions < 1) throw ParameterError("plan: repetitions must be at least 1");
    if (methods.empty()) throw ParameterError("plan: the method list is empty");
    if (scenarios.empty()) throw ParameterError("plan: the scenario list is empty");
    if (presmooth_bandwidth && !(*presmooth_bandwidth > 0.0)) throw ParameterError("plan: presmooth bandwidth must be positive");
    for (const auto& s : scenarios) {
        if (const auto* cfg = std::get_if<ScenarioConfig>(&s)) {
            cfg->validate();
            for (const auto& m : methods) {
                if (m.method == Method::CEN && cfg->n_classes != 2) {
                    throw ParameterError("plan: cen is binary only and cannot run on three-class scenario " + cfg->label());
                }
            }
        }
    }
    for (const auto& m : methods) (void)m.normalized();
}

std::string scenario_name(const PlanScenario& s) {
    if (const auto* cfg = std::get_if<ScenarioConfig>(&s)) return cfg->label();
    return std::get<DatasetReference>(s).name;
}

std::size_t BenchmarkReport::failed_cells() const {
    std::size_t n = 0;
    for (const auto& row : cells) {
        for (const auto& c : row) n += c.failures.empty() ? 0 : 1;
    }
    return n;
}

void summarize_cell(CellResult& cell) {
    double sum = 0.0;
    std::vector<double> js;
    cell.succeeded = 0;
    for (std::size_t r = 0; r < cell.errors.size(); ++r) {
        if (!std::isfinite(cell.errors[r])) continue;
        sum += cell.errors[r];
        ++cell.succeeded;
        if (r < cell.J.size()) js.push_back(static_cast<double>(cell.J[r]));
    }
    if (cell.succeeded == 0) {
        cell.mean = cell.sd = cell.moe = kNaN;
        cell.J_summary = JSummary{kNaN, kNaN, kNaN, kNaN, kNaN};
        return;
    }
    const auto n = static_cast<double>(cell.succeeded);
    cell.mean = sum / n;
    double ss = 0.0;
    for (double e : cell.errors) {
        if (std::isfinite(e)) ss += (e - cell.mean) * (e - cell.mean);
    }
    cell.sd = cell.succeeded > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    cell.moe = 1.96 * cell.sd / std::sqrt(n);
    if (!js.empty()) {
        cell.J_summary = JSummary{quantile7(js, 0.0), quantile7(js, 0.25), quantile7(js, 0.5), quantile7(js, 0.75),
                                  quantile7(js, 1.0)};
    }
}

BenchmarkReport run(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t S = plan.scenarios.size();
    const std::size_t M = plan.methods.size();
    const std::size_t R = plan.repetitions;
    Grid3 g;
    g.outcomes.assign(S, std::vector<std::vector<MethodOutcome>>(R, std::vector<MethodOutcome>(M)));
    std::vector<std::string> scenario_failure(S);

    // Datasets referenced by path are loaded (and smoothed) once up front.
    std::vector<std::shared_ptr<const FunctionalDataset>> loaded(S);
    for (std::size_t s = 0; s < S; ++s) {
        const auto* ref = std::get_if<DatasetReference>(&plan.scenarios[s]);
        if (!ref) continue;
        try {
            FunctionalDataset data = read_curve_csv(ref->path).dataset();
            if (plan.presmooth) {
                data = presmooth(data, plan.presmooth_bandwidth.value_or(default_presmooth_bandwidth(data.grid()))).data;
            }
            loaded[s] = std::make_shared<const FunctionalDataset>(std::move(data));
        } catch (const std::exception& e) {
            scenario_failure[s] = e.what();
        }
    }

    const CounterRng root(plan.seed);
    parallel_for(S * R, plan.workers, [&](std::size_t task) {
        const std::size_t s = task / R;
        const std::size_t r = task % R;
        const CounterRng rep = root.split({stream::repetition, r});
        auto& out = g.outcomes[s][r];
        if (const auto* cfg = std::get_if<ScenarioConfig>(&plan.scenarios[s])) {
            ScenarioConfig c = *cfg;
            c.seed = rep.key();
            std::optional<GeneratedData> data;
            try {
                data.emplace(generate(c));
                if (plan.presmooth) {
                    const double bw = plan.presmooth_bandwidth.value_or(default_presmooth_bandwidth(data->train.grid()));
                    data->train = presmooth(data->train, bw).data;
                    data->test = presmooth(data->test, bw).data;
                }
            } catch (const std::exception& e) {
                for (auto& o : out) o.failure = std::string("generation failed: ") + e.what();
                return;
            }
            for (std::size_t m = 0; m < M; ++m) out[m] = evaluate_split(plan.methods[m], data->train, data->test, rep.split(stream::folds));
        } else {
            if (!loaded[s]) return;
            const auto& ref = std::get<DatasetReference>(plan.scenarios[s]);
            std::vector<std::vector<std::size_t>> folds;
            try {
                folds = stratified_folds(loaded[s]->labels(), ref.folds, rep.split(stream::folds));
            } catch (const std::exception& e) {
                for (auto& o : out) o.failure = e.what();
                return;
            }
            for (std::size_t m = 0; m < M; ++m) out[m] = evaluate_cv(plan.methods[m], *loaded[s], folds);
        }
    });

    std::vector<std::string> names;
    for (const auto& s : plan.scenarios) names.push_back(scenario_name(s));
    return assemble(std::move(names), plan.methods, R, plan.cv_select, g, scenario_failure);
}

BenchmarkReport repeated_cv_evaluate(const FunctionalDataset& data, const std::vector<ClassifierSpec>& methods,
                                     std::size_t repetitions, std::size_t folds, std::uint64_t seed, std::size_t workers,
                                     std::string name) {
    if (repetitions < 1) throw ParameterError("repeated_cv_evaluate: repetitions must be at least 1");
    if (methods.empty()) throw ParameterError("repeated_cv_evaluate: the method list is empty");
    for (const auto& m : methods) (void)m.normalized();
    const std::size_t M = methods.size();
    Grid3 g;
    g.outcomes.assign(1, std::vector<std::vector<MethodOutcome>>(repetitions, std::vector<MethodOutcome>(M)));
    const CounterRng root(seed);
    parallel_for(repetitions, workers, [&](std::size_t r) {
        auto& out = g.outcomes[0][r];
        std::vector<std::vector<std::size_t>> split;
        try {
            split = stratified_folds(data.labels(), folds, root.split({stream::repetition, r, stream::folds}));
        } catch (const std::exception& e) {
            for (auto& o : out) o.failure = e.what();
            return;
        }
        for (std::size_t m = 0; m < M; ++m) out[m] = evaluate_cv(methods[m], data, split);
    });
    return assemble({std::move(name)}, methods, repetitions, true, g, {std::string()});
}

// ---------------------------------------------------------------------------

namespace {

std::string num(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

void cell_row(std::ostream& out, const std::string& scenario, const std::string& method, const CellResult& c,
              bool best, bool tie, const std::string& ratio) {
    out << scenario << ',' << method << ',' << c.succeeded << ',' << c.failures.size() << ',' << num(c.mean) << ','
        << num(c.sd) << ',' << num(c.moe) << ',' << (best ? 1 : 0) << ',' << (tie ? 1 : 0) << ',' << num(c.J_summary.min)
        << ',' << num(c.J_summary.q25) << ',' << num(c.J_summary.median) << ',' << num(c.J_summary.q75) << ','
        << num(c.J_summary.max) << ',' << ratio << '\n';
}

}  // namespace

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "scenario,method,reps_ok,reps_failed,mean,sd,moe,best,within_moe,J_min,J_q25,J_median,J_q75,J_max,ratio_cv\n";
    for (std::size_t s = 0; s < report.scenarios.size(); ++s) {
        const ScenarioSummary& sum = report.summaries[s];
        for (std::size_t m = 0; m < report.methods.size(); ++m) {
            const bool best = sum.best && *sum.best == m;
            const bool tie = std::find(sum.within_moe.begin(), sum.within_moe.end(), m) != sum.within_moe.end();
            cell_row(out, report.scenarios[s], report.methods[m], report.cells[s][m], best, tie, "");
        }
        if (report.cv_select) cell_row(out, report.scenarios[s], "CV", sum.cv, false, false, num(sum.ratio_cv));
    }
}

void write_report_text(std::ostream& out, const BenchmarkReport& report) {
    std::size_t name_w = 8;
    for (const auto& s : report.scenarios) name_w = std::max(name_w, s.size());
    std::vector<std::string> headers = report.methods;
    if (report.cv_select) {
        headers.emplace_back("CV");
        headers.emplace_back("Ratio(CV)");
    }
    std::vector<std::size_t> width;
    for (const auto& h : headers) width.push_back(std::max<std::size_t>(h.size(), 9));
    out << std::left << std::setw(static_cast<int>(name_w)) << "scenario";
    for (std::size_t c = 0; c < headers.size(); ++c) out << "  " << std::right << std::setw(static_cast<int>(width[c])) << headers[c];
    out << '\n';
    for (std::size_t s = 0; s < report.scenarios.size(); ++s) {
        const ScenarioSummary& sum = report.summaries[s];
        out << std::left << std::setw(static_cast<int>(name_w)) << report.scenarios[s];
        std::vector<std::string> cells;
        for (std::size_t m = 0; m < report.methods.size(); ++m) {
            const CellResult& c = report.cells[s][m];
            std::ostringstream v;
            if (c.succeeded == 0) {
                v << "failed";
            } else {
                v << std::fixed << std::setprecision(3) << c.mean;
                if (sum.best && *sum.best == m) {
                    v << '*';
                } else if (std::find(sum.within_moe.begin(), sum.within_moe.end(), m) != sum.within_moe.end()) {
                    v << '+';
                } else {
                    v << ' ';
                }
                if (!c.failures.empty()) v << '!';
            }
            cells.push_back(v.str());
        }
        if (report.cv_select) {
            std::ostringstream cv, ratio;
            if (sum.cv.succeeded > 0) {
                cv << std::fixed << std::setprecision(3) << sum.cv.mean << ' ';
                ratio << std::fixed << std::setprecision(2) << 100.0 * sum.ratio_cv << "% ";
            } else {
                cv << "failed";
            }
            cells.push_back(cv.str());
            cells.push_back(ratio.str());
        }
        for (std::size_t c = 0; c < cells.size(); ++c) out << "  " << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
        out << '\n';
    }
    out << "(" << report.repetitions << " repetitions; * lowest mean error, + within its margin of error, ! some repetitions failed)\n";
}

void write_report_long_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "scenario,method,repetition,error,J\n";
    for (std::size_t s = 0; s < report.scenarios.size(); ++s) {
        for (std::size_t m = 0; m < report.methods.size(); ++m) {
            const CellResult& c = report.cells[s][m];
            for (std::size_t r = 0; r < c.errors.size(); ++r) {
                out << report.scenarios[s] << ',' << report.methods[m] << ',' << r << ',' << num(c.errors[r]) << ','
                    << (std::isfinite(c.errors[r]) ? std::to_string(c.J[r]) : std::string()) << '\n';
            }
        }
        if (report.cv_select) {
            const CellResult& c = report.summaries[s].cv;
            for (std::size_t r = 0; r < c.errors.size(); ++r) {
                out << report.scenarios[s] << ",CV," << r << ',' << num(c.errors[r]) << ','
                    << (std::isfinite(c.errors[r]) ? std::to_string(c.J[r]) : std::string()) << '\n';
            }
        }
    }
}

}  // namespace fbc
