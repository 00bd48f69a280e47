#include "fbc/plan.hpp"

#include "fbc/error.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace fbc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// A small TOML reader: tables, arrays of tables, key = value with strings,
// integers, floats, booleans and single-line arrays of those.

class TomlReader {
public:
    TomlReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        std::istringstream in{std::string(text_)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_;
            std::string_view s = strip_comment(raw);
            s = trim(s);
            if (s.empty()) continue;
            if (s.starts_with("[[")) {
                if (!s.ends_with("]]")) fail("unterminated array-of-tables header");
                const std::string name = header_name(s.substr(2, s.size() - 4));
                json& arr = root[name];
                if (arr.is_null()) arr = json::array();
                if (!arr.is_array()) fail("'" + name + "' is already defined as a non-array");
                arr.push_back(json::object());
                table = &arr.back();
            } else if (s.front() == '[') {
                if (s.back() != ']') fail("unterminated table header");
                const std::string name = header_name(s.substr(1, s.size() - 2));
                if (root.contains(name)) fail("table '" + name + "' defined twice");
                root[name] = json::object();
                table = &root[name];
            } else {
                const auto eq = find_unquoted(s, '=');
                if (eq == std::string_view::npos) fail("expected 'key = value'");
                const std::string key = parse_key(trim(s.substr(0, eq)));
                std::string_view rest = trim(s.substr(eq + 1));
                if (rest.empty()) fail("missing value for '" + key + "'");
                json value = parse_value(rest);
                if (!trim(rest).empty()) fail("unexpected text after value of '" + key + "'");
                if (table->contains(key)) fail("duplicate key '" + key + "'");
                (*table)[key] = std::move(value);
            }
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParameterError(std::string(source_) + ":" + std::to_string(line_) + ": " + what);
    }

    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    static std::string_view strip_comment(std::string_view s) {
        char quote = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (quote) {
                if (c == '\\' && quote == '"') {
                    ++i;
                } else if (c == quote) {
                    quote = 0;
                }
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '#') {
                return s.substr(0, i);
            }
        }
        return s;
    }

    static std::size_t find_unquoted(std::string_view s, char target) {
        char quote = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == target) {
                return i;
            }
        }
        return std::string_view::npos;
    }

    static bool bare_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string header_name(std::string_view s) {
        s = trim(s);
        if (s.empty()) fail("empty table name");
        for (char c : s) {
            if (!bare_key_char(c)) fail("unsupported table name '" + std::string(s) + "' (dotted and quoted names are not supported)");
        }
        return std::string(s);
    }

    std::string parse_key(std::string_view s) {
        if (s.empty()) fail("missing key");
        if (s.front() == '"' || s.front() == '\'') {
            std::string_view rest = s;
            json k = parse_string(rest);
            if (!trim(rest).empty()) fail("malformed quoted key");
            return k.get<std::string>();
        }
        for (char c : s) {
            if (!bare_key_char(c)) fail("invalid key '" + std::string(s) + "' (dotted keys are not supported)");
        }
        return std::string(s);
    }

    json parse_string(std::string_view& s) {
        const char quote = s.front();
        std::string out;
        std::size_t i = 1;
        for (; i < s.size(); ++i) {
            const char c = s[i];
            if (c == quote) break;
            if (c == '\\' && quote == '"') {
                if (++i >= s.size()) fail("unterminated escape");
                switch (s[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape '\\") + s[i] + "'");
                }
            } else {
                out += c;
            }
        }
        if (i >= s.size()) fail("unterminated string");
        s.remove_prefix(i + 1);
        return out;
    }

    json parse_value(std::string_view& s) {
        s = trim(s);
        if (s.empty()) fail("missing value");
        const char c = s.front();
        if (c == '"' || c == '\'') return parse_string(s);
        if (c == '[') {
            s.remove_prefix(1);
            json arr = json::array();
            while (true) {
                s = trim(s);
                if (s.empty()) fail("unterminated array (arrays must fit on one line)");
                if (s.front() == ']') {
                    s.remove_prefix(1);
                    return arr;
                }
                arr.push_back(parse_value(s));
                s = trim(s);
                if (!s.empty() && s.front() == ',') {
                    s.remove_prefix(1);
                } else if (s.empty() || s.front() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
        }
        if (c == '{') fail("inline tables are not supported; use a [table] section");
        std::size_t end = 0;
        while (end < s.size() && s[end] != ',' && s[end] != ']' && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
        const std::string tok(s.substr(0, end));
        s.remove_prefix(end);
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string digits;
        for (char d : tok) {
            if (d != '_') digits += d;
        }
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                const double v = std::stod(digits, &used);
                if (used == digits.size()) return v;
            } else {
                const long long v = std::stoll(digits, &used);
                if (used == digits.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + tok + "'");
    }

    std::string_view text_;
    std::string_view source_;
    std::size_t line_ = 0;
};

json parse_document(std::string_view text, ConfigFormat format, std::string_view source) {
    if (format == ConfigFormat::Toml) return TomlReader(text, source).parse();
    try {
        json doc = json::parse(text);
        if (!doc.is_object()) throw ParameterError(std::string(source) + ": top level must be an object");
        return doc;
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string(source) + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Field access with path-qualified diagnostics.

class Fields {
public:
    Fields(const json& obj, std::string path, std::string_view source) : obj_(obj), path_(std::move(path)), source_(source) {
        if (!obj_.is_object()) fail("", "expected a table/object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        std::string where = path_;
        if (!key.empty()) where += (where.empty() ? "" : ".") + key;
        throw ParameterError(std::string(source_) + ": " + (where.empty() ? "" : where + ": ") + what);
    }

    bool has(const char* key) {
        seen_.insert(key);
        return obj_.contains(key);
    }
    const json& raw(const char* key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::uint64_t integer(const char* key, std::uint64_t fallback, std::uint64_t min = 0) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        const bool ok = v.is_number_unsigned() ? v.get<std::uint64_t>() >= min
                                               : v.is_number_integer() && v.get<long long>() >= 0 &&
                                                     static_cast<std::uint64_t>(v.get<long long>()) >= min;
        if (!ok) fail(key, "expected an integer >= " + std::to_string(min));
        return v.get<std::uint64_t>();
    }
    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }
    bool boolean(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }
    std::string string(const char* key, std::string fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }
    /// Rejects keys that were never queried (catches typos).
    void finish() const {
        for (const auto& [k, v] : obj_.items()) {
            if (!seen_.contains(k)) fail(k, "unknown field");
        }
    }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    const json& obj_;
    std::string path_;
    std::string_view source_;
    std::set<std::string> seen_;
};

template <class F>
auto wrap(Fields& f, const char* key, F&& fn) {
    try {
        return fn();
    } catch (const ParameterError& e) {
        f.fail(key, e.what());
    }
}

struct ScenarioDefaults {
    std::size_t n_train = 100, n_test = 150, grid_points = 51, J_gen = 201;
    double noise_sd = 0.5;
};

ScenarioDefaults read_defaults(Fields& f, ScenarioDefaults d) {
    d.n_train = f.integer("n_train", d.n_train, 1);
    d.n_test = f.integer("n_test", d.n_test, 1);
    d.grid_points = f.integer("grid_points", d.grid_points, 3);
    d.J_gen = f.integer("J_gen", d.J_gen, 1);
    d.noise_sd = f.number("noise_sd", d.noise_sd);
    return d;
}

ScenarioConfig with_defaults(ScenarioConfig c, const ScenarioDefaults& d) {
    c.n_train = d.n_train;
    c.n_test = d.n_test;
    c.grid_points = d.grid_points;
    c.J_gen = d.J_gen;
    c.noise_sd = d.noise_sd;
    return c;
}

template <class Enum>
Enum factor_from(Fields& f, const char* key, std::initializer_list<std::pair<const char*, Enum>> names, Enum fallback) {
    if (!f.has(key)) return fallback;
    std::string v = f.string(key, "");
    for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    std::string valid;
    for (const auto& [n, e] : names) {
        if (v == n) return e;
        valid += (valid.empty() ? "" : ", ") + std::string(n);
    }
    f.fail(key, "expected one of " + valid);
}

ScenarioConfig scenario_from(Fields& f, const ScenarioDefaults& defaults) {
    // A label sets all four factors; spelled-out factors may accompany it but must agree.
    ScenarioConfig c;
    std::string label;
    if (f.has("label")) {
        label = f.string("label", "");
        c = wrap(f, "label", [&] { return ScenarioConfig::from_label(label); });
    }
    c.eigenfunction_factor = factor_from<EigenfunctionFactor>(
        f, "eigenfunctions",
        {{"same", EigenfunctionFactor::Same}, {"s", EigenfunctionFactor::Same}, {"rotated", EigenfunctionFactor::Rotated},
         {"r", EigenfunctionFactor::Rotated}, {"multirotated", EigenfunctionFactor::MultiRotated}, {"m", EigenfunctionFactor::MultiRotated}},
        c.eigenfunction_factor);
    c.mean_factor = factor_from<MeanFactor>(f, "means", {{"same", MeanFactor::Same}, {"s", MeanFactor::Same}, {"different", MeanFactor::Different}, {"d", MeanFactor::Different}}, c.mean_factor);
    c.eigenvalue_factor = factor_from<EigenvalueFactor>(
        f, "eigenvalues", {{"same", EigenvalueFactor::Same}, {"s", EigenvalueFactor::Same}, {"different", EigenvalueFactor::Different}, {"d", EigenvalueFactor::Different}},
        c.eigenvalue_factor);
    c.score_factor = factor_from<ScoreFactor>(f, "scores", {{"n", ScoreFactor::N}, {"t", ScoreFactor::T}, {"v", ScoreFactor::V}}, c.score_factor);
    c.n_classes = c.eigenfunction_factor == EigenfunctionFactor::MultiRotated ? 3 : 2;
    if (!label.empty() && c.label() != label) f.fail("label", "factor fields describe " + c.label() + ", not " + label);
    c = with_defaults(c, read_defaults(f, defaults));
    c.n_classes = f.integer("n_classes", c.n_classes, 2);
    wrap(f, "", [&] {
        c.validate();
        return 0;
    });
    return c;
}

ClassifierSpec method_from_name(const std::string& name, std::size_t j_max) {
    return ClassifierSpec::with_default_range(parse_method(name), j_max);
}

ClassifierSpec method_from(Fields& f, std::size_t j_max) {
    if (!f.has("name")) f.fail("name", "missing method name");
    const std::string name = f.string("name", "");
    ClassifierSpec spec = wrap(f, "name", [&] { return method_from_name(name, j_max); });
    auto parse_range = [&](const char* key, const std::string& text) {
        const auto colon = text.find(':');
        try {
            if (colon == std::string::npos) return std::variant<std::size_t, JRange>(static_cast<std::size_t>(std::stoul(text)));
            return std::variant<std::size_t, JRange>(JRange{std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))});
        } catch (const std::exception&) {
            f.fail(key, "expected an integer or a range 'a:b'");
        }
    };
    if (f.has("J")) {
        const json& v = f.raw("J");
        if (v.is_number_integer()) {
            spec.J = static_cast<std::size_t>(f.integer("J", 1, 1));
        } else if (v.is_string()) {
            spec.J = parse_range("J", v.get<std::string>());
        } else {
            f.fail("J", "expected an integer or a range 'a:b'");
        }
    }
    if (f.has("J_range")) spec.J = parse_range("J_range", f.string("J_range", ""));
    const std::string rank = f.string("rank_corr", "tau");
    if (rank == "tau" || rank == "kendall") {
        spec.rank_method = RankMethod::KendallTau;
    } else if (rank == "rho" || rank == "spearman") {
        spec.rank_method = RankMethod::SpearmanRho;
    } else {
        f.fail("rank_corr", "expected tau or rho");
    }
    spec.folds = f.integer("folds", spec.folds, 2);
    spec = wrap(f, "", [&] { return spec.normalized(); });
    if (spec.rank_method == RankMethod::SpearmanRho && copula_family(spec.method) == CopulaFamily::StudentT) {
        f.fail("rank_corr", "t-copula methods require tau");
    }
    f.finish();
    return spec;
}

}  // namespace

ConfigFormat config_format(const std::filesystem::path& path) {
    return path.extension() == ".json" ? ConfigFormat::Json : ConfigFormat::Toml;
}

ExperimentPlan parse_plan(std::string_view text, ConfigFormat format, std::string_view source) {
    const json doc = parse_document(text, format, source);
    Fields top(doc, "", source);
    ExperimentPlan plan;
    plan.seed = top.integer("seed", 0);
    plan.repetitions = top.integer("repetitions", 100, 1);
    plan.cv_select = top.boolean("cv_select", true);
    plan.workers = top.integer("workers", 1, 1);
    if (top.has("presmooth")) {
        const json& v = top.raw("presmooth");
        if (v.is_boolean()) {
            plan.presmooth = v.get<bool>();
        } else if (v.is_number() && v.get<double>() > 0.0) {
            plan.presmooth = true;
            plan.presmooth_bandwidth = v.get<double>();
        } else {
            top.fail("presmooth", "expected true, false or a positive bandwidth");
        }
    }
    const std::size_t j_max = top.integer("J_max", 30, 1);
    const ScenarioDefaults defaults = read_defaults(top, ScenarioDefaults{});

    if (top.has("methods")) {
        const json& v = top.raw("methods");
        std::vector<std::string> names;
        if (v.is_string() && v.get<std::string>() == "all") {
            for (Method m : kAllMethods) names.emplace_back(method_key(m));
        } else if (v.is_array()) {
            for (const auto& e : v) {
                if (!e.is_string()) top.fail("methods", "expected method names");
                names.push_back(e.get<std::string>());
            }
        } else {
            top.fail("methods", "expected a list of method names or \"all\"");
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            plan.methods.push_back(wrap(top, "methods", [&] { return method_from_name(names[i], j_max); }));
        }
    }
    if (top.has("method")) {
        const json& arr = top.raw("method");
        if (!arr.is_array()) top.fail("method", "expected an array of tables ([[method]])");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Fields f(arr[i], "method[" + std::to_string(i) + "]", source);
            plan.methods.push_back(method_from(f, j_max));
        }
    }

    if (top.has("scenarios")) {
        const json& v = top.raw("scenarios");
        if (!v.is_array()) top.fail("scenarios", "expected a list of scenario labels");
        for (const auto& e : v) {
            if (!e.is_string()) top.fail("scenarios", "expected scenario labels");
            std::string label = e.get<std::string>();
            std::vector<std::string> expanded{label};
            if (label == "binary") expanded = scenario_labels(2);
            if (label == "multiclass") expanded = scenario_labels(3);
            for (const auto& l : expanded) {
                ScenarioConfig c = wrap(top, "scenarios", [&] { return ScenarioConfig::from_label(l); });
                plan.scenarios.emplace_back(with_defaults(c, defaults));
            }
        }
    }
    if (top.has("scenario")) {
        const json& arr = top.raw("scenario");
        if (!arr.is_array()) top.fail("scenario", "expected an array of tables ([[scenario]])");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Fields f(arr[i], "scenario[" + std::to_string(i) + "]", source);
            if (f.has("data")) {
                DatasetReference ref;
                ref.path = f.string("data", "");
                ref.name = f.string("name", ref.path.stem().string());
                ref.folds = f.integer("folds", 10, 2);
                plan.scenarios.emplace_back(std::move(ref));
            } else {
                plan.scenarios.emplace_back(scenario_from(f, defaults));
            }
            f.finish();
        }
    }
    top.finish();
    if (plan.methods.empty()) top.fail("methods", "no methods given (use methods = [...] or [[method]] tables)");
    if (plan.scenarios.empty()) top.fail("scenarios", "no scenarios given (use scenarios = [...] or [[scenario]] tables)");
    try {
        plan.validate();
    } catch (const ParameterError& e) {
        throw ParameterError(std::string(source) + ": " + e.what());
    }
    return plan;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

ExperimentPlan load_plan(const std::filesystem::path& path) {
    ExperimentPlan plan = parse_plan(read_file(path), config_format(path), path.string());
    for (auto& s : plan.scenarios) {
        if (auto* ref = std::get_if<DatasetReference>(&s); ref && ref->path.is_relative()) {
            ref->path = path.parent_path() / ref->path;
        }
    }
    return plan;
}

ScenarioConfig parse_scenario_config(std::string_view text, ConfigFormat format, std::string_view source) {
    const json doc = parse_document(text, format, source);
    Fields f(doc, "", source);
    ScenarioConfig c = scenario_from(f, ScenarioDefaults{});
    c.seed = f.integer("seed", 0);
    f.finish();
    return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    return parse_scenario_config(read_file(path), config_format(path), path.string());
}

std::string scenario_config_json(const ScenarioConfig& c) {
    static const char* const eig[] = {"same", "rotated", "multirotated"};
    static const char* const sd[] = {"same", "different"};
    static const char* const sc[] = {"N", "T", "V"};
    const json doc{{"label", c.label()},
                   {"eigenfunctions", eig[static_cast<int>(c.eigenfunction_factor)]},
                   {"means", sd[static_cast<int>(c.mean_factor)]},
                   {"eigenvalues", sd[static_cast<int>(c.eigenvalue_factor)]},
                   {"scores", sc[static_cast<int>(c.score_factor)]},
                   {"n_classes", c.n_classes},
                   {"n_train", c.n_train},
                   {"n_test", c.n_test},
                   {"grid_points", c.grid_points},
                   {"J_gen", c.J_gen},
                   {"noise_sd", c.noise_sd},
                   {"seed", c.seed}};
    return doc.dump(2) + "\n";
}

}  // namespace fbc
