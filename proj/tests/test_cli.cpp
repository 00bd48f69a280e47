#include "fbc/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("fbc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome cli(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" FBC_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir_ / "stdout.txt"), slurp(dir_ / "stderr.txt")};
    }
    fs::path path(const std::string& name) const { return dir_ / name; }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateIsByteIdenticalUnderSeed) {
    ASSERT_EQ(cli("simulate --scenario RSDN --seed 7 --out a").code, 0);
    ASSERT_EQ(cli("simulate --scenario RSDN --seed 7 --out b").code, 0);
    for (const char* f : {"train.csv", "test.csv", "manifest.json"}) {
        EXPECT_EQ(slurp(path("a") / f), slurp(path("b") / f)) << f;
    }
    EXPECT_NE(slurp(path("a/manifest.json")).find("\"RSDN\""), std::string::npos);
    const auto train = fbc::read_curve_csv(path("a/train.csv"));
    EXPECT_EQ(train.curves.rows(), 100);
    EXPECT_EQ(train.grid.size(), 51u);
    ASSERT_EQ(cli("simulate --scenario RSDN --seed 8 --out c").code, 0);
    EXPECT_NE(slurp(path("a/train.csv")), slurp(path("c/train.csv")));
}

TEST_F(Cli, SimulateRejectsUnknownLabel) {
    const auto r = cli("simulate --scenario XXXX --out x");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("RSDN"), std::string::npos);
}

TEST_F(Cli, SimulateMulticlassAndScenarioFile) {
    ASSERT_EQ(cli("simulate --scenario MDSN --n-train 30 --n-test 12 --out m").code, 0);
    const auto f = fbc::read_curve_csv(path("m/train.csv"));
    EXPECT_EQ(std::set<int>(f.labels->begin(), f.labels->end()), (std::set<int>{0, 1, 2}));
    write("s.toml", "eigenfunctions = \"rotated\"\nscores = \"t\"\nn_train = 10\nn_test = 4\ngrid_points = 21\n");
    ASSERT_EQ(cli("simulate --scenario s.toml --out s").code, 0);
    EXPECT_EQ(fbc::read_curve_csv(path("s/train.csv")).grid.size(), 21u);
    EXPECT_NE(slurp(path("s/manifest.json")).find("RSST"), std::string::npos);
}

TEST_F(Cli, TrainClassifyRoundTrip) {
    ASSERT_EQ(cli("simulate --scenario RSDN --n-train 60 --n-test 40 --seed 3 --out d").code, 0);
    const auto t = cli("train --method bct --data d/train.csv --J-range 1:6 --folds 5 --seed 1 --model m1.json");
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_NE(t.out.find("raised to 2"), std::string::npos);
    EXPECT_NE(t.out.find("J,cv_error\n2,"), std::string::npos);
    EXPECT_NE(t.out.find("selected J* = "), std::string::npos);
    ASSERT_EQ(cli("train --method bct --data d/train.csv --J-range 1:6 --folds 5 --seed 1 --model m2.json").code, 0);
    EXPECT_EQ(slurp(path("m1.json")), slurp(path("m2.json")));

    const auto c = cli("classify --model m1.json --data d/train.csv --out pred.csv --scores");
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(c.out.find("error rate"), std::string::npos);
    const auto model = fbc::load_model(path("m1.json"));
    const auto data = fbc::read_curve_csv(path("d/train.csv"));
    const auto fitted = fbc::classify(model, data.curves, data.grid);
    std::ifstream in(path("pred.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "label,score_0,score_1");
    for (int want : fitted) {
        ASSERT_TRUE(std::getline(in, line));
        EXPECT_EQ(std::stoi(line.substr(0, line.find(','))), want);
    }
    EXPECT_FALSE(std::getline(in, line));
}

TEST_F(Cli, ClassifyEdgeCases) {
    ASSERT_EQ(cli("simulate --scenario SDSN --n-train 40 --n-test 10 --out d").code, 0);
    ASSERT_EQ(cli("train --method cen --data d/train.csv --J 3 --model m.json").code, 0);
    write("empty.csv", slurp(path("d/test.csv")).substr(0, slurp(path("d/test.csv")).find('\n') + 1));
    ASSERT_EQ(cli("classify --model m.json --data empty.csv --out e.csv").code, 0);
    EXPECT_EQ(slurp(path("e.csv")), "label\n");
    ASSERT_EQ(cli("simulate --scenario SDSN --n-train 4 --n-test 4 --grid-points 31 --out g").code, 0);
    const auto r = cli("classify --model m.json --data g/test.csv --out x.csv");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("grid"), std::string::npos);
    EXPECT_EQ(cli("classify --model missing.json --data d/test.csv --out x.csv").code, 2);
}

TEST_F(Cli, TrainUsageErrors) {
    ASSERT_EQ(cli("simulate --scenario MDSN --n-train 30 --n-test 6 --out m").code, 0);
    const auto r = cli("train --method cen --data m/train.csv --J 2");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("not applicable"), std::string::npos);
    EXPECT_EQ(cli("train --method svm --data m/train.csv --J 2").code, 1);
    EXPECT_EQ(cli("train --method bc --data m/train.csv --J 2 --J-range 1:3").code, 1);
    EXPECT_EQ(cli("train --method bc --data nope.csv --J 2").code, 2);
    write("bad.csv", "0,0.5,1,label\n1,2,3,0\n1,x,3,1\n");
    const auto bad = cli("train --method bc --data bad.csv --J 1");
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("bad.csv:3"), std::string::npos);
}

TEST_F(Cli, BenchmarkSmokeAndWorkerInvariance) {
    write("plan.toml", "seed = 5\nrepetitions = 3\nn_train = 40\nn_test = 30\nscenarios = [\"RSDN\"]\n"
                       "[[method]]\nname = \"bcg\"\nJ = \"2:5\"\nfolds = 4\n");
    ASSERT_EQ(cli("benchmark --plan plan.toml --workers 1 --out r1.csv --text r1.txt --long l1.csv").code, 0);
    ASSERT_EQ(cli("benchmark --plan plan.toml --workers 4 --out r4.csv --long l4.csv").code, 0);
    EXPECT_EQ(slurp(path("r1.csv")), slurp(path("r4.csv")));
    EXPECT_EQ(slurp(path("l1.csv")), slurp(path("l4.csv")));
    EXPECT_NE(slurp(path("r1.csv")).find("RSDN,BCG,3,0,"), std::string::npos);
    EXPECT_NE(slurp(path("r1.txt")).find("BCG"), std::string::npos);
}

TEST_F(Cli, BenchmarkFailuresAndPlanErrors) {
    write("plan.toml", "repetitions = 2\nn_train = 12\nn_test = 10\nscenarios = [\"RSDN\"]\n"
                       "[[method]]\nname = \"bcg\"\nJ = 10\nfolds = 3\n");
    const auto r = cli("benchmark --plan plan.toml --out r.csv");
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("BCG"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("r.csv")));
    write("broken.toml", "repetitions = 2\nmethods = [\"bc\"\n");
    const auto b = cli("benchmark --plan broken.toml");
    EXPECT_EQ(b.code, 1);
    EXPECT_NE(b.err.find("broken.toml:2"), std::string::npos);
}

TEST_F(Cli, CvEvaluate) {
    ASSERT_EQ(cli("simulate --scenario RSDN --n-train 50 --n-test 4 --out d").code, 0);
    const auto r = cli("cv-evaluate --data d/train.csv --methods bc,plsda --reps 2 --folds 5 --J-max 4 --out cv.csv");
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(path("cv.csv"));
    EXPECT_NE(csv.find("train,BC,2,0,"), std::string::npos);
    EXPECT_NE(csv.find("train,PLSDA,2,0,"), std::string::npos);
}
