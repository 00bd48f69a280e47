#pragma once

#include "fbc/classifiers.hpp"
#include "fbc/simgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fbc {

/// A labelled dataset evaluated by repeated stratified k-fold CV instead of
/// fresh train/test draws.
struct DatasetReference {
    std::string name;
    std::filesystem::path path;
    std::size_t folds = 10;
};

using PlanScenario = std::variant<ScenarioConfig, DatasetReference>;

struct ExperimentPlan {
    std::vector<PlanScenario> scenarios;
    std::vector<ClassifierSpec> methods;
    std::size_t repetitions = 100;
    /// Adds the column for the classifier chosen by lowest CV error.
    bool cv_select = true;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    /// Local-linear pre-smoothing of all curves; bandwidth defaults to five grid spacings.
    bool presmooth = false;
    std::optional<double> presmooth_bandwidth;

    /// Throws ParameterError.
    void validate() const;
};

std::string scenario_name(const PlanScenario& s);

/// Quantiles (type 7) of the selected J over successful repetitions.
struct JSummary {
    double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct CellResult {
    std::vector<double> errors;     ///< per repetition; NaN where the repetition failed
    std::vector<std::size_t> J;     ///< per repetition; 0 where failed
    std::vector<std::string> failures;  ///< one message per failed repetition
    std::size_t succeeded = 0;
    double mean = 0.0;
    double sd = 0.0;
    double moe = 0.0;  ///< 1.96 sd / sqrt(N)
    JSummary J_summary;
};

struct ScenarioSummary {
    std::optional<std::size_t> best;     ///< method index with the lowest mean
    std::vector<std::size_t> within_moe; ///< methods with mean <= best mean + best MOE (includes best)
    CellResult cv;                       ///< error of the CV-chosen classifier per repetition
    std::vector<std::size_t> cv_choice;  ///< method index chosen per repetition
    double ratio_cv = 0.0;               ///< (err(CV) - err(best)) / err(best)
};

struct BenchmarkReport {
    std::vector<std::string> scenarios;
    std::vector<std::string> methods;
    std::size_t repetitions = 0;
    bool cv_select = true;
    std::vector<std::vector<CellResult>> cells;  ///< [scenario][method]
    std::vector<ScenarioSummary> summaries;

    /// Number of (scenario, method) cells with at least one failed repetition.
    [[nodiscard]] std::size_t failed_cells() const;
};

/// Deterministic given the plan; results do not depend on `workers`.
BenchmarkReport run(const ExperimentPlan& plan);

/// Repeated stratified k-fold CV on a fixed dataset. Each repetition draws new
/// folds; a method's error for the repetition is its CV error at the J it
/// selects, so the fold split serves both selection and assessment.
BenchmarkReport repeated_cv_evaluate(const FunctionalDataset& data, const std::vector<ClassifierSpec>& methods,
                                     std::size_t repetitions, std::size_t folds, std::uint64_t seed,
                                     std::size_t workers = 1, std::string name = "data");

/// One row per scenario x method (plus a CV row per scenario when enabled).
void write_report_csv(std::ostream& out, const BenchmarkReport& report);
/// Aligned table: scenarios down, methods across; `*` marks the best, `+` the MOE ties.
void write_report_text(std::ostream& out, const BenchmarkReport& report);
/// scenario,method,repetition,error,J rows for box plots.
void write_report_long_csv(std::ostream& out, const BenchmarkReport& report);

/// Aggregates per-repetition values in place (mean, sd, MOE, J quantiles).
void summarize_cell(CellResult& cell);

}  // namespace fbc
