#include "fbc/io.hpp"

#include "fbc/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace fbc {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
    }
    return true;
}

[[noreturn]] void csv_error(std::string_view source, std::size_t line, const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

FunctionalDataset CurveFile::dataset() const {
    if (!labels) throw DataError("curve file has no label column");
    return FunctionalDataset(grid, curves, *labels);
}

CurveFile read_curve_csv(std::istream& in, std::string_view source) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string_view> cells;
    // Header
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) csv_error(source, lineno, "missing header row");
    const std::string header = line;
    cells = split_commas(header);
    const bool has_label = iequals(cells.back(), "label");
    const std::size_t m = cells.size() - (has_label ? 1 : 0);
    std::vector<double> points;
    for (std::size_t j = 0; j < m; ++j) {
        const auto v = parse_double(cells[j]);
        if (!v) csv_error(source, lineno, "header column " + std::to_string(j + 1) + " ('" + std::string(cells[j]) + "') is not a grid point");
        points.push_back(*v);
    }
    std::optional<Grid> grid;
    try {
        grid.emplace(std::move(points));
    } catch (const DataError& e) {
        csv_error(source, lineno, e.what());
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        cells = split_commas(line);
        if (cells.size() != m + (has_label ? 1 : 0)) {
            csv_error(source, lineno, "expected " + std::to_string(m + (has_label ? 1 : 0)) + " fields, found " + std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < m; ++j) {
            const auto v = parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) csv_error(source, lineno, "field " + std::to_string(j + 1) + " ('" + std::string(cells[j]) + "') is not a finite number");
            values.push_back(*v);
        }
        if (has_label) {
            const std::string_view tok = cells[m];
            int y = -1;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), y);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || y < 0) {
                csv_error(source, lineno, "label '" + std::string(tok) + "' is not a nonnegative integer");
            }
            labels.push_back(y);
        }
        ++rows;
    }
    CurveFile out{.grid = std::move(*grid)};
    out.curves = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
    if (has_label) out.labels = std::move(labels);
    return out;
}

CurveFile read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return read_curve_csv(in, path.string());
}

void write_curve_csv(std::ostream& out, const Grid& grid, const Matrix& curves, const std::vector<int>* labels) {
    if (static_cast<std::size_t>(curves.cols()) != grid.size()) throw DimensionError("write_curve_csv: curves do not match the grid");
    if (labels && labels->size() != static_cast<std::size_t>(curves.rows())) throw DimensionError("write_curve_csv: label count mismatch");
    std::string line;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j > 0) line += ',';
        line += format_double(grid[j]);
    }
    if (labels) line += ",label";
    out << line << '\n';
    for (Eigen::Index i = 0; i < curves.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < curves.cols(); ++j) {
            if (j > 0) line += ',';
            line += format_double(curves(i, j));
        }
        if (labels) line += ',' + std::to_string((*labels)[static_cast<std::size_t>(i)]);
        out << line << '\n';
    }
}

void write_curve_csv(const std::filesystem::path& path, const FunctionalDataset& data) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_curve_csv(out, data.grid(), data.curves(), &data.labels());
}

// ---------------------------------------------------------------------------
// Model JSON

namespace {

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

const json& field(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw DataError(std::string("model JSON: missing field '") + key + "'");
    return obj.at(key);
}

Vector vector_from(const json& j, const char* what) {
    if (!j.is_array()) throw DataError(std::string("model JSON: '") + what + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw DataError(std::string("model JSON: '") + what + "' must hold numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from(const json& j, const char* what) {
    if (!j.is_array()) throw DataError(std::string("model JSON: '") + what + "' must be an array of rows");
    if (j.empty()) return Matrix(0, 0);
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vector row = vector_from(j[r], what);
        if (static_cast<std::size_t>(row.size()) != cols) throw DataError(std::string("model JSON: ragged rows in '") + what + "'");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

json basis_json(const BasisSystem& b) {
    json out{{"kind", b.kind == BasisKind::PC ? "pc" : "pls"},
             {"grid", b.grid.points()},
             {"mean", to_json(b.mean)},
             {"functions", to_json(b.functions)}};
    if (b.kind == BasisKind::PC) {
        out["eigenvalues"] = to_json(b.eigenvalues);
    } else {
        out["loadings"] = to_json(b.loadings);
        out["dcoef"] = to_json(b.dcoef);
        out["response_mean"] = b.response_mean;
        out["truncated"] = b.truncated;
    }
    return out;
}

BasisSystem basis_from(const json& j) {
    BasisSystem b;
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind != "pc" && kind != "pls") throw DataError("model JSON: basis kind must be 'pc' or 'pls'");
    b.kind = kind == "pc" ? BasisKind::PC : BasisKind::PLS;
    const Vector pts = vector_from(field(j, "grid"), "grid");
    b.grid = Grid(std::vector<double>(pts.data(), pts.data() + pts.size()));
    b.mean = vector_from(field(j, "mean"), "mean");
    b.functions = matrix_from(field(j, "functions"), "functions");
    const auto m = static_cast<Eigen::Index>(b.grid.size());
    if (b.mean.size() != m || b.functions.cols() != m) throw DataError("model JSON: basis does not match its grid");
    if (b.kind == BasisKind::PC) {
        b.eigenvalues = vector_from(field(j, "eigenvalues"), "eigenvalues");
        if (b.eigenvalues.size() != b.functions.rows()) throw DataError("model JSON: one eigenvalue per basis function required");
    } else {
        b.loadings = matrix_from(field(j, "loadings"), "loadings");
        b.dcoef = vector_from(field(j, "dcoef"), "dcoef");
        b.response_mean = field(j, "response_mean").get<double>();
        b.truncated = j.value("truncated", false);
        if (b.loadings.rows() != b.functions.rows() || b.loadings.cols() != m || b.dcoef.size() != b.functions.rows()) {
            throw DataError("model JSON: PLS loadings/coefficients do not match the weight functions");
        }
    }
    return b;
}

const char* family_key(CopulaFamily f) {
    switch (f) {
        case CopulaFamily::Independence: return "independence";
        case CopulaFamily::Gaussian: return "gaussian";
        case CopulaFamily::StudentT: return "t";
    }
    return "?";
}

json group_json(const GroupModel& g) {
    json marginals = json::array();
    for (const auto& mg : g.marginals) {
        marginals.push_back({{"sample", mg.sample()},
                             {"bandwidth", mg.bandwidth()},
                             {"rule", mg.rule() == BandwidthRule::PluginSJ ? "plugin" : "silverman"}});
    }
    json copula{{"family", family_key(g.copula.family())}};
    if (g.copula.family() != CopulaFamily::Independence) copula["corr"] = to_json(g.copula.corr());
    if (g.copula.tail_index()) {
        copula["tail_index"] = *g.copula.tail_index();
        copula["tail_at_boundary"] = g.copula.tail_at_boundary();
    }
    return {{"prior", g.prior}, {"marginals", marginals}, {"copula", copula}};
}

GroupModel group_from(const json& j) {
    GroupModel g;
    g.prior = field(j, "prior").get<double>();
    for (const auto& mj : field(j, "marginals")) {
        const Vector s = vector_from(field(mj, "sample"), "sample");
        const std::string rule = mj.value("rule", "plugin");
        g.marginals.emplace_back(std::vector<double>(s.data(), s.data() + s.size()), field(mj, "bandwidth").get<double>(),
                                 rule == "silverman" ? BandwidthRule::Silverman : BandwidthRule::PluginSJ);
    }
    const json& cj = field(j, "copula");
    const std::string family = field(cj, "family").get<std::string>();
    if (family == "independence") {
        g.copula = CopulaModel::independence(g.marginals.size());
    } else if (family == "gaussian") {
        g.copula = CopulaModel::gaussian(matrix_from(field(cj, "corr"), "corr"));
    } else if (family == "t") {
        g.copula = CopulaModel::student_t(matrix_from(field(cj, "corr"), "corr"), field(cj, "tail_index").get<double>(),
                                          cj.value("tail_at_boundary", false));
    } else {
        throw DataError("model JSON: unknown copula family '" + family + "'");
    }
    if (g.copula.dim() != g.marginals.size()) throw DataError("model JSON: copula dimension does not match the marginals");
    g.quantile_table = copula_quantile_table(g.copula, g.sample_size());
    return g;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    json doc{{"format", "fbc-model"},
             {"version", kModelFormatVersion},
             {"method", std::string(method_key(model.method))},
             {"rank_method", model.rank_method == RankMethod::KendallTau ? "tau" : "rho"},
             {"J", model.J},
             {"num_groups", model.num_groups},
             {"presmooth_bandwidth", model.presmooth_bandwidth ? json(*model.presmooth_bandwidth) : json(nullptr)},
             {"basis", basis_json(model.basis())}};
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TrainedBayesModel>) {
                json groups = json::array();
                for (const auto& g : m.groups) groups.push_back(group_json(g));
                doc["groups"] = groups;
            } else if constexpr (std::is_same_v<T, CentroidModel>) {
                doc["centroid"] = {{"direction", to_json(m.direction)}, {"projected_means", to_json(m.projected_means)}};
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                doc["lda"] = {{"means", to_json(m.means)},
                              {"pooled_inverse", to_json(m.pooled_inverse)},
                              {"priors", m.priors},
                              {"ridge_added", m.ridge_added}};
            } else {
                doc["logistic"] = {{"score_mean", to_json(m.score_mean)},
                                   {"score_scale", to_json(m.score_scale)},
                                   {"coefficients", to_json(m.coefficients)},
                                   {"capped", m.capped},
                                   {"converged", m.converged},
                                   {"iterations", m.iterations}};
            }
        },
        model.model);
    return doc.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    }
    try {
        if (doc.value("format", std::string()) != "fbc-model") throw DataError("model JSON: not an fbc model document");
        const int version = field(doc, "version").get<int>();
        if (version != kModelFormatVersion) {
            throw DataError("model JSON: unsupported version " + std::to_string(version) + " (this build reads version " +
                            std::to_string(kModelFormatVersion) + ")");
        }
        TrainedModel model;
        try {
            model.method = parse_method(field(doc, "method").get<std::string>());
        } catch (const ParameterError& e) {
            throw DataError(std::string("model JSON: ") + e.what());
        }
        const std::string rank = field(doc, "rank_method").get<std::string>();
        model.rank_method = rank == "rho" ? RankMethod::SpearmanRho : RankMethod::KendallTau;
        model.J = field(doc, "J").get<std::size_t>();
        model.num_groups = field(doc, "num_groups").get<std::size_t>();
        if (const json& bw = field(doc, "presmooth_bandwidth"); !bw.is_null()) model.presmooth_bandwidth = bw.get<double>();
        BasisSystem basis = basis_from(field(doc, "basis"));
        if (basis.size() != model.J) throw DataError("model JSON: basis size does not match J");

        const Method m = model.method;
        if (is_bayes(m)) {
            TrainedBayesModel bayes{.method = m, .basis = std::move(basis)};
            for (const auto& gj : field(doc, "groups")) bayes.groups.push_back(group_from(gj));
            if (bayes.groups.size() != model.num_groups) throw DataError("model JSON: group count mismatch");
            for (const auto& g : bayes.groups) {
                if (g.marginals.size() != model.J) throw DataError("model JSON: each group needs J marginals");
            }
            model.model = std::move(bayes);
        } else if (m == Method::CEN) {
            const json& c = field(doc, "centroid");
            CentroidModel cen{.basis = std::move(basis),
                              .direction = vector_from(field(c, "direction"), "direction"),
                              .projected_means = vector_from(field(c, "projected_means"), "projected_means")};
            if (cen.projected_means.size() != 2 || cen.direction.size() != static_cast<Eigen::Index>(cen.basis.grid.size())) {
                throw DataError("model JSON: malformed centroid model");
            }
            model.model = std::move(cen);
        } else if (m == Method::PLSDA) {
            const json& l = field(doc, "lda");
            LdaModel lda{.basis = std::move(basis),
                         .means = matrix_from(field(l, "means"), "means"),
                         .pooled_inverse = matrix_from(field(l, "pooled_inverse"), "pooled_inverse"),
                         .priors = field(l, "priors").get<std::vector<double>>(),
                         .ridge_added = l.value("ridge_added", false)};
            model.model = std::move(lda);
        } else {
            const json& l = field(doc, "logistic");
            LogisticModel logit{.basis = std::move(basis),
                                .score_mean = vector_from(field(l, "score_mean"), "score_mean"),
                                .score_scale = vector_from(field(l, "score_scale"), "score_scale"),
                                .coefficients = matrix_from(field(l, "coefficients"), "coefficients"),
                                .capped = l.value("capped", false),
                                .converged = l.value("converged", true),
                                .iterations = l.value("iterations", 0)};
            model.model = std::move(logit);
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    } catch (const NumericalError& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    } catch (const ParameterError& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << serialize_model(model);
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace fbc
