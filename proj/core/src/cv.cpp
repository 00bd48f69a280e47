#include "fbc/classifiers.hpp"

#include "fbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fbc {

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, std::size_t folds, CounterRng rng) {
    if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
    if (folds > labels.size()) {
        throw ParameterError("cannot split " + std::to_string(labels.size()) + " curves into " + std::to_string(folds) + " folds");
    }
    int num_groups = 0;
    for (int y : labels) num_groups = std::max(num_groups, y + 1);
    std::vector<std::vector<std::size_t>> out(folds);
    std::size_t offset = 0;
    for (int k = 0; k < num_groups; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == k) members.push_back(i);
        }
        CounterRng g = rng.split(static_cast<std::uint64_t>(k));
        for (std::size_t i = members.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(g() % i);
            std::swap(members[i - 1], members[j]);
        }
        for (std::size_t r = 0; r < members.size(); ++r) out[(offset + r) % folds].push_back(members[r]);
        offset += members.size();
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

CvResult select_J_cv(const ClassifierSpec& spec, const FunctionalDataset& data,
                     const std::vector<std::vector<std::size_t>>& folds) {
    const ClassifierSpec s = spec.normalized();
    CvResult result;
    if (s.has_range()) {
        const JRange r = std::get<JRange>(s.J);
        for (std::size_t j = r.min; j <= r.max; ++j) result.candidates.push_back(j);
    } else {
        result.candidates.push_back(std::get<std::size_t>(s.J));
    }
    const std::size_t nc = result.candidates.size();
    const std::size_t j_top = result.candidates.back();
    std::vector<std::size_t> wrong(nc, 0);
    result.feasible.assign(nc, true);

    const std::size_t n = data.size();
    for (const auto& test_rows : folds) {
        if (test_rows.empty()) continue;
        std::vector<bool> in_test(n, false);
        for (std::size_t i : test_rows) in_test[i] = true;
        std::vector<std::size_t> train_rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_test[i]) train_rows.push_back(i);
        }
        std::size_t fold_max = 0;
        std::optional<ModelPath> path;
        try {
            path.emplace(s.method, s.rank_method, data.subset(train_rows), j_top);
            fold_max = path->max_feasible_J();
        } catch (const DataError&) {
            fold_max = 0;
        } catch (const NumericalError&) {
            fold_max = 0;
        }
        std::vector<std::size_t> Js;
        std::vector<std::size_t> slot;
        for (std::size_t c = 0; c < nc; ++c) {
            if (result.candidates[c] > fold_max) {
                result.feasible[c] = false;
            } else if (result.feasible[c]) {
                Js.push_back(result.candidates[c]);
                slot.push_back(c);
            }
        }
        if (Js.empty()) continue;
        Matrix test(static_cast<Eigen::Index>(test_rows.size()), static_cast<Eigen::Index>(data.grid_size()));
        for (std::size_t r = 0; r < test_rows.size(); ++r) test.row(static_cast<Eigen::Index>(r)) = data.curves().row(static_cast<Eigen::Index>(test_rows[r]));
        std::vector<std::vector<int>> predictions;
        try {
            predictions = path->classify_each(test, Js);
        } catch (const NumericalError&) {
            for (std::size_t c : slot) result.feasible[c] = false;
            continue;
        }
        for (std::size_t q = 0; q < Js.size(); ++q) {
            for (std::size_t r = 0; r < test_rows.size(); ++r) {
                if (predictions[q][r] != data.labels()[test_rows[r]]) ++wrong[slot[q]];
            }
        }
    }

    result.errors.assign(nc, std::numeric_limits<double>::quiet_NaN());
    bool any = false;
    for (std::size_t c = 0; c < nc; ++c) {
        if (!result.feasible[c]) continue;
        result.errors[c] = static_cast<double>(wrong[c]) / static_cast<double>(n);
        if (!any || result.errors[c] < result.best_error) {
            result.best_J = result.candidates[c];
            result.best_error = result.errors[c];
            any = true;
        }
    }
    if (!any) {
        throw NumericalError("no candidate J is feasible for " + std::string(method_key(s.method)) +
                             " in every cross-validation fold");
    }
    return result;
}

CvResult select_J_cv(const ClassifierSpec& spec, const FunctionalDataset& data, CounterRng rng) {
    return select_J_cv(spec, data, stratified_folds(data.labels(), spec.folds, rng));
}

ClassifierSelection select_classifier_cv(const FunctionalDataset& data, const std::vector<ClassifierSpec>& specs,
                                         const std::vector<std::vector<std::size_t>>& folds) {
    if (specs.empty()) throw ParameterError("select_classifier_cv: no classifiers given");
    ClassifierSelection out;
    bool any = false;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        CvResult r;
        try {
            r = select_J_cv(specs[s], data, folds);
        } catch (const NumericalError&) {
            r.best_error = std::numeric_limits<double>::infinity();
        }
        if (std::isfinite(r.best_error)) {
            const CvResult& b = any ? out.results[out.best] : r;
            const bool better = !any || r.best_error < b.best_error ||
                                (r.best_error == b.best_error && specs[s].method < specs[out.best].method);
            if (better) {
                out.best = s;
                any = true;
            }
        }
        out.results.push_back(std::move(r));
    }
    if (!any) throw NumericalError("no classifier could be cross-validated on this data");
    return out;
}

ClassifierSelection select_classifier_cv(const FunctionalDataset& data, const std::vector<ClassifierSpec>& specs,
                                         CounterRng rng) {
    std::size_t folds = specs.empty() ? 10 : specs.front().folds;
    return select_classifier_cv(data, specs, stratified_folds(data.labels(), folds, rng));
}

CvTrained train_with_cv(const ClassifierSpec& spec, const FunctionalDataset& data, CounterRng rng) {
    const ClassifierSpec s = spec.normalized();
    CvTrained out;
    if (!s.has_range()) {
        out.model = train(s, data);
        return out;
    }
    out.cv = select_J_cv(s, data, rng);
    ClassifierSpec fixed = s;
    fixed.J = out.cv->best_J;
    out.model = train(fixed, data);
    return out;
}

}  // namespace fbc
