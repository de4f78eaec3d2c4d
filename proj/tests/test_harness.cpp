#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "levyflow/errors.hpp"
#include "levyflow/experiments.hpp"
#include "levyflow/report.hpp"

using namespace levyflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("levyflow_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_negmoment(const fs::path& dir) {
    auto c = default_config(ExperimentKind::NegMoment);
    c.numerics.replicas = 2000;
    c.master_seed = 17;
    c.output.directory = dir.string();
    return c;
}

ExperimentConfig small_uniqueness() {
    auto c = default_config(ExperimentKind::Uniqueness);
    c.numerics.replicas = 40;
    c.numerics.steps = 64;
    c.numerics.levels = {4, 8};
    return c;
}

} // namespace

TEST(Config, RoundTripsEveryKind) {
    for (auto k : all_kinds()) {
        auto c = default_config(k);
        c.master_seed = 99;
        c.numerics.t_grid = {0.125, 0.5};
        const auto text = serialize_config(c);
        const auto back = parse_config(text);
        EXPECT_EQ(serialize_config(back), text) << kind_name(k);
        EXPECT_EQ(config_hash(back), config_hash(c));
    }
}

TEST(Config, KindNamesRoundTrip) {
    for (auto k : all_kinds()) EXPECT_EQ(parse_kind(kind_name(k)), k);
    EXPECT_THROW(parse_kind("nonsense"), ConfigError);
}

TEST(Config, UnknownKeysAreRejected) {
    auto j = config_to_json(default_config(ExperimentKind::Sample));
    j["numerics"]["replica"] = 10;
    try {
        config_from_json(j);
        FAIL() << "accepted an unknown key";
    } catch (const ConfigError& e) {
        EXPECT_EQ(exit_code(e.kind()), 2);
    }
    auto top = config_to_json(default_config(ExperimentKind::Sample));
    top["extra"] = true;
    EXPECT_THROW(config_from_json(top), ConfigError);
}

TEST(Config, InvalidModelIsAConfigError) {
    auto j = config_to_json(default_config(ExperimentKind::Sample));
    j["model"]["alpha"] = 2.5;
    EXPECT_THROW(config_from_json(j), ConfigError);
    EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, HashTracksEveryField) {
    const auto base = default_config(ExperimentKind::Bismut);
    auto seed = base;
    seed.master_seed = 1;
    auto reps = base;
    reps.numerics.replicas += 1;
    auto gamma = base;
    gamma.numerics.gamma = 0.2;
    EXPECT_EQ(config_hash(base).size(), 16u);
    EXPECT_NE(config_hash(base), config_hash(seed));
    EXPECT_NE(config_hash(base), config_hash(reps));
    EXPECT_NE(config_hash(base), config_hash(gamma));
    auto out = base;
    out.output.directory = "elsewhere";
    EXPECT_EQ(config_hash(base), config_hash(out));
    EXPECT_EQ(config_hash(base), config_hash(default_config(ExperimentKind::Bismut)));
}

TEST(MetricRow, PassIsRecomputable) {
    EXPECT_TRUE(MetricRow::within("a", 1.05, 0.0, 1.0, 0.1).pass);
    EXPECT_FALSE(MetricRow::within("a", 1.2, 0.0, 1.0, 0.1).pass);
    EXPECT_TRUE(MetricRow::at_most("b", 0.5, 0.5).pass);
    EXPECT_FALSE(MetricRow::at_least("c", 0.1, 0.2).pass);
    EXPECT_TRUE(MetricRow::between("d", 1.0, 0.8, 1.25).pass);
    EXPECT_TRUE(MetricRow::diagnostic("e", 123.0).pass);
}

TEST(Records, JsonRoundTripPreservesPassFlags) {
    const auto r = execute_experiment(small_negmoment(scratch("unused")));
    ASSERT_FALSE(r.rows.empty());
    const auto back = record_from_json(nlohmann::json::parse(record_to_json(r).dump()));
    ASSERT_EQ(back.rows.size(), r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].name, r.rows[i].name);
        EXPECT_EQ(back.rows[i].pass, back.rows[i].recompute()) << back.rows[i].name;
        EXPECT_EQ(back.rows[i].pass, r.rows[i].pass);
    }
    EXPECT_EQ(back.config_hash, r.config_hash);
}

TEST(Records, CsvBodiesAreDeterministic) {
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    const auto a = run_experiment(small_negmoment(d1));
    const auto b = run_experiment(small_negmoment(d2));
    const auto f1 = d1 / "negmoment_negmoment.csv", f2 = d2 / "negmoment_negmoment.csv";
    ASSERT_TRUE(fs::exists(f1));
    const auto t1 = slurp(f1), t2 = slurp(f2);
    EXPECT_EQ(t1.rfind("# id=negmoment", 0), 0u);
    EXPECT_EQ(csv_body(t1), csv_body(t2));
    EXPECT_EQ(csv_body(t1).substr(0, 14), "t,mc,se,oracle");
    EXPECT_TRUE(fs::exists(d1 / "negmoment.json"));
    EXPECT_EQ(a.config_hash, b.config_hash);
}

TEST(Records, FormatSelectionLimitsOutputs) {
    const auto dir = scratch("formats");
    auto c = small_negmoment(dir);
    c.output.formats = {"json"};
    const auto written = write_outputs(execute_experiment(c), c);
    ASSERT_EQ(written.size(), 1u);
    EXPECT_EQ(written[0].extension(), ".json");
}

TEST(Records, UnwritableDirectoryIsAnIoError) {
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "file";
    auto c = small_negmoment(blocker / "sub");
    try {
        write_outputs(execute_experiment(c), c);
        FAIL() << "wrote under a regular file";
    } catch (const IoError& e) {
        EXPECT_EQ(exit_code(e.kind()), 5);
    }
}

TEST(Experiments, NegativeMomentsNeedASubordinatedModel) {
    auto c = default_config(ExperimentKind::NegMoment);
    c.model = stable_type_power(1.5, 1.0, 1);
    EXPECT_THROW(execute_experiment(c), UnsupportedModel);
}

TEST(Experiments, InadmissibleDriftIsRejected) {
    auto c = small_uniqueness();
    c.drift = capped_power_drift(0.1, 1.0);
    try {
        execute_experiment(c);
        FAIL() << "accepted a drift below the admissible exponent";
    } catch (const InadmissibleModel& e) {
        EXPECT_EQ(exit_code(e.kind()), 3);
    }
}

TEST(Experiments, SampleMatchesCharacteristicFunction) {
    auto c = default_config(ExperimentKind::Sample);
    c.numerics.replicas = 5000;
    const auto r = execute_experiment(c);
    EXPECT_TRUE(r.passed());
    ASSERT_NE(r.find("ks_cauchy_p_value"), nullptr);
}

TEST(Uniqueness, ZeroDriftGivesIdenticalFlows) {
    auto c = small_uniqueness();
    c.drift = zero_drift();
    const auto r = run_uniqueness_suite(c);
    for (const auto& m : r.rows)
        if (m.name.rfind("D_n", 0) == 0 || m.name.rfind("G_n", 0) == 0) EXPECT_EQ(m.value, 0.0) << m.name;
    EXPECT_TRUE(r.passed());
}

TEST(Uniqueness, RejectsEmptyLadder) {
    auto c = small_uniqueness();
    c.numerics.levels.clear();
    EXPECT_THROW(run_uniqueness_suite(c), ConfigError);
}

TEST(Report, EmptyListExitsCleanly) {
    const auto dir = scratch("empty_report");
    const auto s = emit_report({}, dir);
    EXPECT_EQ(s.exit_code, 0);
    EXPECT_EQ(s.records, 0u);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Report, FailingRecordSetsExitCode) {
    ResultRecord good, bad;
    good.id = "good";
    good.rows.push_back(MetricRow::at_most("x", 0.1, 1.0));
    bad.id = "bad";
    bad.rows.push_back(MetricRow::at_most("x", 2.0, 1.0));
    bad.series.push_back({"curve", "t", "y", {0.1, 1.0}, {1.0, 0.1}});
    const auto dir = scratch("failing_report");
    const auto s = emit_report({good, bad}, dir);
    EXPECT_EQ(s.exit_code, 1);
    EXPECT_EQ(s.failed, 1u);
    EXPECT_TRUE(fs::exists(dir / "bad_curve.svg"));
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["failed"], 1);
    EXPECT_EQ(summary["records"][1]["failing_rows"][0], "x");
}

TEST(Report, LoadsWrittenRecords) {
    const auto dir = scratch("load");
    run_experiment(small_negmoment(dir));
    const auto records = load_records(dir);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].kind, ExperimentKind::NegMoment);
    EXPECT_THROW(load_records(dir / "missing"), IoError);
}

TEST(Report, SvgSkipsNonPositiveValuesOnLogAxes) {
    const Series s{"s", "t", "y", {0.0, 0.1, 1.0}, {1.0, -1.0, 0.5}};
    const auto svg = render_svg(s, "title <x>");
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("title &lt;x&gt;"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_EQ(svg.find("inf"), std::string::npos);
}
