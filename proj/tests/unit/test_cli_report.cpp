#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "motionskill/cli.hpp"
#include "motionskill/report.hpp"
#include "test_util.hpp"

using namespace motionskill;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json load(const std::string& name) {
  return nlohmann::json::parse(slurp(fs::path(MOTIONSKILL_GOLDEN_DIR) / name));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = test_util::temp_dir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(Report, GoldenTable) {
  const std::vector<nlohmann::json> reports = {load("rf_pca.json"), load("svm_nopca.json"), load("cnn_dae.json")};
  EXPECT_EQ(render_table(reports), slurp(fs::path(MOTIONSKILL_GOLDEN_DIR) / "report_table.txt"));
}

TEST(Report, SingleLatentRowHasNoPcaColumn) {
  const std::vector<nlohmann::json> reports = {load("cnn_dae.json")};
  const auto table = render_table(reports, 2);
  EXPECT_EQ(table.find("PCA"), std::string::npos);
  EXPECT_TRUE(table.starts_with("Model"));
  EXPECT_NE(table.find("0.90 ± 0.09"), std::string::npos);
}

TEST(Report, Malformed) {
  EXPECT_ERROR_KIND(check_report(nlohmann::json::object()), ErrorKind::MalformedReport);
  auto r = load("rf_pca.json");
  r["summary"].erase("npv");
  EXPECT_ERROR_KIND(check_report(r), ErrorKind::MalformedReport);
  EXPECT_ERROR_KIND(render_table(std::span<const nlohmann::json>{}), ErrorKind::MalformedReport);
}

TEST(Report, RadarUsesActiveColumns) {
  FeatureMatrix m;
  for (int i = 0; i < 4; ++i) {
    FeatureVector v;
    v.sample_id = "s" + std::to_string(i);
    v.label = i % 2 ? Label::Expert : Label::Novice;
    for (std::size_t j = 0; j < kFeatureCount; ++j) v.values[j] = i + j;
    m.rows.push_back(v);
  }
  const auto full = radar_svg(m);
  EXPECT_NE(full.find("rms_acc_l"), std::string::npos);
  const auto svg = radar_svg(drop_acceleration(m));
  EXPECT_EQ(svg.find("rms_acc_l"), std::string::npos);
  for (const char* name : {"rms_vel_l", "rms_vel_r", "rms_jerk_l", "rms_jerk_r", "path_total", "bimanual_dexterity"}) {
    EXPECT_NE(svg.find(name), std::string::npos) << name;
  }
  EXPECT_TRUE(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

TEST_F(CliTest, UnknownSubcommandAndHelp) {
  EXPECT_EQ(run({"train"}).code, 1);
  EXPECT_NE(run({"train"}).err.find("UnknownSubcommand"), std::string::npos);
  EXPECT_EQ(run({"cv", "--help"}).code, 0);
  EXPECT_EQ(run({"cv", "--bogus"}).code, 1);
}

TEST_F(CliTest, MissingInputIsIoError) {
  EXPECT_EQ(run({"features", "--input", path("absent"), "--output", path("f.csv"), "--fps", "120"}).code, 2);
  EXPECT_EQ(run({"report", "--input", path("absent.json")}).code, 2);
}

TEST_F(CliTest, NyquistRejectedBeforeLoading) {
  const auto r = run({"cv", "--input", path("absent"), "--fps", "30", "--cutoff", "24", "--report", path("r.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Nyquist"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("r.json")));
}

TEST_F(CliTest, EmptyReportIsMalformed) {
  std::ofstream(path("empty.json")) << "{}";
  const auto r = run({"report", "--input", path("empty.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("MalformedReport"), std::string::npos);
}

TEST_F(CliTest, SynthFeaturesCvChainIsDeterministic) {
  ASSERT_EQ(run({"synth", "--subjects", "4", "--seed", "42", "--out", path("data")}).code, 0);
  EXPECT_TRUE(fs::exists(path("data/segments.csv")));
  EXPECT_TRUE(fs::exists(path("data/run_config.json")));
  ASSERT_EQ(run({"filter", "--input", path("data"), "--output", path("smooth"), "--fps", "120", "--cutoff", "24"}).code,
            0);
  ASSERT_EQ(run({"features", "--input", path("smooth"), "--output", path("f.csv"), "--fps", "120"}).code, 0);
  std::vector<std::string> reports;
  for (const char* jobs : {"1", "8"}) {
    const std::string report = path("cv.json");
    const auto r = run({"cv", "--features", path("f.csv"), "--k", "4", "--seed", "42", "--trees", "20", "--jobs", jobs,
                        "--report", report});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Random Forest"), std::string::npos);
    reports.push_back(slurp(report));
  }
  EXPECT_EQ(reports[0], reports[1]);
  const auto j = nlohmann::json::parse(reports[0]);
  EXPECT_EQ(j["run_config"]["seed"], 42);
  EXPECT_EQ(j["plan"]["fold_assignments"].size(), j["features"]["rows"].get<std::size_t>());

  const auto table = run({"report", "--input", path("cv.json"), "--output", path("table.txt"), "--features",
                          path("f.csv"), "--radar", path("radar.svg")});
  ASSERT_EQ(table.code, 0) << table.err;
  EXPECT_NE(slurp(path("table.txt")).find("Random Forest"), std::string::npos);
  EXPECT_NE(slurp(path("radar.svg")).find("bimanual_dexterity"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  ASSERT_EQ(run({"synth", "--subjects", "3", "--seed", "5", "--out", path("data")}).code, 0);
  std::ofstream(path("run.cfg")) << "# cv settings\nsubcommand = cv\nk = 3\nseed = 9\nmodel = logreg\nfps = 120\n";
  const auto r = run({"cv", "--config", path("run.cfg"), "--input", path("data"), "--seed", "11", "--report",
                      path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_EQ(j["run_config"]["k"], 3);
  EXPECT_EQ(j["run_config"]["seed"], 11);
  EXPECT_EQ(j["run_config"]["model"], "logreg");
  EXPECT_EQ(j["plan"]["k"], 3);

  const auto clash = run({"dae", "--config", path("run.cfg"), "--input", path("data"), "--report", path("d.json")});
  EXPECT_EQ(clash.code, 1);
  EXPECT_NE(clash.err.find("ConfigConflict"), std::string::npos);
  const auto both = run({"cv", "--features", path("x.csv"), "--input", path("data"), "--fps", "120", "--report",
                         path("b.json")});
  EXPECT_NE(both.err.find("ConfigConflict"), std::string::npos);
}

TEST_F(CliTest, FilterSingleFileAndInputsUntouched) {
  ASSERT_EQ(run({"synth", "--subjects", "1", "--out", path("data")}).code, 0);
  const auto before = slurp(path("data/E01.csv"));
  const auto r = run({"filter", "--input", path("data/E01.csv"), "--output", path("E01.f.csv"), "--fps", "120"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("data/E01.csv")), before);
  EXPECT_TRUE(fs::exists(path("E01.f.csv.config.json")));
  EXPECT_NE(slurp(path("E01.f.csv")), before);
  EXPECT_EQ(run({"filter", "--input", path("data"), "--output", path("data"), "--fps", "120"}).code, 1);

  const auto overlay = run({"report", "--trajectory", path("data/E01.csv"), "--fps", "120", "--overlay",
                            path("overlay.svg")});
  EXPECT_EQ(overlay.code, 0) << overlay.err;
  EXPECT_TRUE(fs::exists(path("overlay.svg")));
}

TEST_F(CliTest, DaeChainIsDeterministic) {
  ASSERT_EQ(run({"synth", "--subjects", "3", "--seed", "42", "--out", path("data")}).code, 0);
  std::vector<std::string> reports;
  for (const char* jobs : {"1", "8"}) {
    const std::string report = path("dae.json");
    const auto r = run({"dae", "--input", path("data"), "--fps", "120", "--image-size", "16", "--latent", "32",
                        "--epochs", "2", "--cnn-epochs", "5", "--k", "3", "--jobs", jobs, "--report", report,
                        "--save-model", path("model")});
    ASSERT_EQ(r.code, 0) << r.err;
    reports.push_back(slurp(report));
  }
  EXPECT_EQ(reports[0], reports[1]);
  EXPECT_TRUE(fs::exists(path("model.bin")));
  EXPECT_TRUE(fs::exists(path("model.json")));
  const auto j = nlohmann::json::parse(reports[0]);
  EXPECT_EQ(j["model"], "1-D CNN");
  EXPECT_EQ(j["run_config"]["latent"], 32);
}
