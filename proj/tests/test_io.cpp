#include "fbc/error.hpp"
#include "fbc/io.hpp"
#include "fbc/simgen.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace fbc;

TEST(Numbers, ShortestRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.7, 123456789.125}) {
        const std::string s = format_double(x);
        EXPECT_EQ(parse_double(s), x) << s;
    }
    EXPECT_EQ(format_double(0.7), "0.7");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_FALSE(parse_double("1.5x"));
    EXPECT_FALSE(parse_double(""));
    EXPECT_FALSE(parse_double("1e999"));
    EXPECT_EQ(parse_double(" 4.25 "), 4.25);
}

TEST(CurveCsv, RoundTripIsExact) {
    auto c = ScenarioConfig::from_label("RSDN");
    c.n_train = 12;
    c.seed = 3;
    const auto d = generate(c).train;
    std::stringstream io;
    write_curve_csv(io, d.grid(), d.curves(), &d.labels());
    const CurveFile f = read_curve_csv(io, "mem");
    EXPECT_TRUE(f.grid.matches(d.grid()));
    EXPECT_EQ(f.grid.points(), d.grid().points());
    EXPECT_EQ(f.curves, d.curves());
    EXPECT_EQ(*f.labels, d.labels());
    EXPECT_EQ(f.dataset().priors(), d.priors());
}

TEST(CurveCsv, LabelColumnIsOptional) {
    std::istringstream in("0,0.5,1\n1,2,3\n4,5,6\n");
    const CurveFile f = read_curve_csv(in);
    EXPECT_FALSE(f.labels);
    EXPECT_EQ(f.curves.rows(), 2);
    EXPECT_THROW((void)f.dataset(), DataError);
    std::istringstream empty("0,0.5,1,label\n");
    EXPECT_EQ(read_curve_csv(empty).curves.rows(), 0);
}

TEST(CurveCsv, DiagnosticsCarryLineNumbers) {
    const auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            (void)read_curve_csv(in, "x.csv");
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("0,0.5,1,label\n1,2,3,0\n1,2,0\n").find("x.csv:3"), std::string::npos);
    EXPECT_NE(message("0,0.5,1,label\n1,2,3,0\n1,2,zz,1\n").find("x.csv:3"), std::string::npos);
    EXPECT_NE(message("0,0.5,1,label\n1,2,3,-1\n").find("x.csv:2"), std::string::npos);
    EXPECT_NE(message("0,0.5,1,label\n1,2,3,0.5\n").find("x.csv:2"), std::string::npos);
    EXPECT_NE(message("0,1,label\n1,2,0\n").find("x.csv:1"), std::string::npos);
    EXPECT_NE(message("0,0.5,2,label\n1,2,3,0\n").find("x.csv:1"), std::string::npos);
    EXPECT_NE(message("").find("x.csv"), std::string::npos);
}

namespace {

struct Fixture {
    GeneratedData data;
    Matrix probe;
};

Fixture make_fixture(const char* label) {
    auto c = ScenarioConfig::from_label(label);
    c.n_train = 90;
    c.seed = 11;
    Fixture f{generate(c), {}};
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z;
    f.probe.resize(1000, static_cast<Eigen::Index>(c.grid_points));
    for (Eigen::Index i = 0; i < 1000; ++i) {
        const Eigen::Index src = i % f.data.test.curves().rows();
        for (Eigen::Index t = 0; t < f.probe.cols(); ++t) f.probe(i, t) = f.data.test.curves()(src, t) + 0.5 * z(gen);
    }
    return f;
}

void expect_round_trip(const TrainedModel& model, const Fixture& f) {
    const TrainedModel back = deserialize_model(serialize_model(model));
    EXPECT_EQ(back.method, model.method);
    EXPECT_EQ(back.J, model.J);
    EXPECT_EQ(serialize_model(back), serialize_model(model));
    const Grid& g = f.data.test.grid();
    EXPECT_EQ(classify(back, f.probe, g), classify(model, f.probe, g)) << method_label(model.method);
    EXPECT_EQ(log_posterior_ratios(back, f.probe, g), log_posterior_ratios(model, f.probe, g)) << method_label(model.method);
}

}  // namespace

TEST(ModelJson, RoundTripIsBitExactForEveryMethod) {
    const auto f = make_fixture("RSDN");
    for (Method m : kAllMethods) {
        ClassifierSpec s;
        s.method = m;
        s.J = std::size_t{5};
        expect_round_trip(train(s, f.data.train), f);
    }
}

TEST(ModelJson, MulticlassAndOptions) {
    const auto f = make_fixture("MDSN");
    for (Method m : {Method::BCt_PLS, Method::Logistic, Method::PLSDA}) {
        ClassifierSpec s;
        s.method = m;
        s.J = std::size_t{4};
        expect_round_trip(train(s, f.data.train), f);
    }
    ClassifierSpec s;
    s.method = Method::BCG;
    s.J = std::size_t{3};
    s.rank_method = RankMethod::SpearmanRho;
    auto model = train(s, f.data.train);
    model.presmooth_bandwidth = 0.1;
    const auto back = deserialize_model(serialize_model(model));
    EXPECT_EQ(back.rank_method, RankMethod::SpearmanRho);
    EXPECT_EQ(back.presmooth_bandwidth, 0.1);
    expect_round_trip(model, f);
}

TEST(ModelJson, RejectsForeignAndFutureDocuments) {
    const auto f = make_fixture("RSDN");
    ClassifierSpec s;
    s.method = Method::BC;
    s.J = std::size_t{2};
    auto doc = nlohmann::json::parse(serialize_model(train(s, f.data.train)));
    EXPECT_EQ(doc["format"], "fbc-model");
    EXPECT_EQ(doc["version"], kModelFormatVersion);
    auto future = doc;
    future["version"] = kModelFormatVersion + 1;
    EXPECT_THROW(deserialize_model(future.dump()), DataError);
    auto foreign = doc;
    foreign["format"] = "other";
    EXPECT_THROW(deserialize_model(foreign.dump()), DataError);
    auto broken = doc;
    broken.erase("basis");
    EXPECT_THROW(deserialize_model(broken.dump()), DataError);
    EXPECT_THROW(deserialize_model("{not json"), DataError);
}
