#include "distband/report.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "distband/simlab.hpp"
#include "distband/svg.hpp"

using distband::ComparisonReport;
using distband::GroupedSamples;
using distband::parse_csv;
using distband::parse_filter;
using distband::read_csv;
using distband::render_json;
using distband::render_svg;
using distband::render_text;
using distband::RunConfig;
using distband::run_comparison;

namespace fs = std::filesystem;

namespace {

fs::path write_temp_csv(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("parse_csv handles quoting and CRLF") {
  std::istringstream in(
      "name,\"value, quoted\",grp\r\n"
      "\"say \"\"hi\"\"\",1.5,a\r\n"
      "plain,2.5,b\n");
  const auto table = parse_csv(in);
  REQUIRE(table.header.size() == 3);
  CHECK(table.header[1] == "value, quoted");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == "say \"hi\"");
  CHECK(table.rows[0][1] == "1.5");
  CHECK(table.rows[1][2] == "b");
}

TEST_CASE("read_csv drops blank values and counts them") {
  const auto path = write_temp_csv("distband_blank.csv",
                                   "y,grp\n1.0,0\n,0\n2.0,1\n");
  const auto g = read_csv(path.string(), "y", "grp");
  CHECK(g.nx() == 1);
  CHECK(g.ny() == 1);
  CHECK(g.n_dropped == 1);
  fs::remove(path);
}

TEST_CASE("read_csv accepts arbitrary group labels") {
  const auto path = write_temp_csv("distband_labels.csv",
                                   "y,who\n1,cat\n2,dog\n3,cat\n");
  const auto g = read_csv(path.string(), "y", "who");
  CHECK(g.label_x == "cat");
  CHECK(g.label_y == "dog");
  CHECK(g.x == std::vector<double>{1.0, 3.0});
  fs::remove(path);
}

TEST_CASE("read_csv applies the row filter") {
  const auto path = write_temp_csv(
      "distband_filter.csv",
      "y,grp,married\n1,0,1\n2,0,0\n3,1,1\n4,1,0\n5,0,1\n");
  const auto g = read_csv(path.string(), "y", "grp", parse_filter("married==1"));
  CHECK(g.x == std::vector<double>{1.0, 5.0});
  CHECK(g.y == std::vector<double>{3.0});
  CHECK(g.n_dropped == 2);
  fs::remove(path);
}

TEST_CASE("read_csv names the missing piece") {
  CHECK_THROWS_WITH(read_csv("/nonexistent/nope.csv", "y", "grp"),
                    Catch::Matchers::ContainsSubstring("nope.csv"));
  const auto path = write_temp_csv("distband_cols.csv", "y,grp\n1,0\n2,1\n");
  CHECK_THROWS_WITH(read_csv(path.string(), "wage", "grp"),
                    Catch::Matchers::ContainsSubstring("wage"));
  CHECK_THROWS_WITH(read_csv(path.string(), "y", "grp", parse_filter("state==MO")),
                    Catch::Matchers::ContainsSubstring("state"));
  fs::remove(path);
}

TEST_CASE("filter expressions parse all comparators") {
  using Op = distband::RowFilter::Op;
  CHECK(parse_filter("a==1").op == Op::Eq);
  CHECK(parse_filter("a!=1").op == Op::Ne);
  CHECK(parse_filter("a<=1").op == Op::Le);
  CHECK(parse_filter("a>=1").op == Op::Ge);
  CHECK(parse_filter("a<1").op == Op::Lt);
  CHECK(parse_filter("a>1").op == Op::Gt);
  CHECK(parse_filter("m<=2").column == "m");
  CHECK(parse_filter("m<=2").literal == "2");
  CHECK_THROWS(parse_filter("nonsense"));
  CHECK_THROWS(parse_filter("==1"));

  // numeric comparison when both sides are numbers, string otherwise
  CHECK(parse_filter("v==1").keeps("1.0"));
  CHECK(parse_filter("v<10").keeps("9.5"));
  CHECK_FALSE(parse_filter("v<10").keeps("10.5"));
  CHECK(parse_filter("s==cat").keeps("cat"));
  CHECK_FALSE(parse_filter("s==cat").keeps("dog"));
}

TEST_CASE("identical samples produce a quiet report") {
  GroupedSamples g;
  g.label_x = "0";
  g.label_y = "1";
  g.x = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  g.y = g.x;
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.reps = 2000;
  const auto report = run_comparison(config, g);
  CHECK_FALSE(report.rej_gof10);
  CHECK_FALSE(report.rej_gof05);
  CHECK_FALSE(report.rej_gof01);
  CHECK(report.ranges.empty());
  CHECK(report.tie_warning);  // every value appears in both groups
  const auto text = render_text(report);
  CHECK(text.find("do not reject") != std::string::npos);
  CHECK(text.find("With strong control") == std::string::npos);
}

TEST_CASE("tail-outlier fixture rejects and renders ranges") {
  const auto g = distband::simlab::tail_outlier_fixture();
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.alpha = 0.01;
  config.want_pvalue = true;
  config.reps = 2000;
  const auto report = run_comparison(config, g);
  CHECK(report.rej_gof10);
  CHECK(report.rej_gof05);
  CHECK(report.rej_gof01);
  REQUIRE(report.p_gof.has_value());
  CHECK(report.p_gof->value < 0.02);
  CHECK_FALSE(report.ranges.empty());
  CHECK(report.alpha_sim <= 0.01);
  CHECK(report.ks.d == Catch::Approx(0.3).margin(1e-12));
  REQUIRE(report.ks.p_permutation.has_value());

  const auto text = render_text(report);
  CHECK(text.find("Comparing distribution of y when grp=0 vs. grp=1") == 0);
  CHECK(text.find("At a 10% level: reject") != std::string::npos);
  CHECK(text.find("At a  1% level: reject") != std::string::npos);
  CHECK(text.find("from") != std::string::npos);
  CHECK(text.find("ranges of y:") != std::string::npos);
}

TEST_CASE("fully separated n=25 groups reject at 1% over one interior range") {
  GroupedSamples g;
  g.label_x = "0";
  g.label_y = "1";
  for (int i = 1; i <= 25; ++i) g.x.push_back(i);
  for (int i = 101; i <= 125; ++i) g.y.push_back(i);
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.alpha = 0.01;
  config.reps = 1000;
  const auto report = run_comparison(config, g);
  CHECK(report.rej_gof01);
  REQUIRE(report.ranges.ranges.size() == 1);
  CHECK(report.ranges.ranges[0].first > 1.0);     // interior to the pooled support
  CHECK(report.ranges.ranges[0].second < 125.0);
  CHECK(report.ranges.ranges[0].first <= 25.0);
  CHECK(report.ranges.ranges[0].second >= 101.0);
}

TEST_CASE("verdicts are monotone across levels") {
  const auto g = distband::simlab::tail_outlier_fixture();
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.reps = 1000;
  const auto report = run_comparison(config, g);
  if (report.rej_gof01) CHECK(report.rej_gof05);
  if (report.rej_gof05) CHECK(report.rej_gof10);
}

TEST_CASE("floored p-value renders with the < sign") {
  ComparisonReport report;
  report.var_name = "y";
  report.group_var = "grp";
  report.label_x = "0";
  report.label_y = "1";
  report.p_gof = distband::PValue{0.0001, true};
  const auto text = render_text(report);
  CHECK(text.find("Simulated p-value < .0001") != std::string::npos);
  report.p_gof = distband::PValue{0.0042, false};
  CHECK(render_text(report).find("Simulated p-value = .0042") != std::string::npos);
}

TEST_CASE("JSON report carries the full schema") {
  const auto g = distband::simlab::separated_fixture();
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.reps = 1000;
  config.alpha = 0.10;
  const auto report = run_comparison(config, g);
  const auto doc = nlohmann::json::parse(render_json(report));

  CHECK(doc.at("n").get<std::vector<long>>() == std::vector<long>{10, 5, 5});
  CHECK(doc.at("p_gof").is_null());  // not requested
  for (const char* key : {"rej_gof10", "rej_gof05", "rej_gof01", "alpha", "alpha_sim",
                          "alpha_tilde", "rej_ranges", "ks", "tie_warning"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc.at("ks").contains("d"));
  CHECK(doc.at("ks").contains("p_asymptotic"));
  CHECK(doc.at("ks").at("p_permutation").is_null());
  if (report.ranges.empty()) {
    CHECK(doc.at("rej_ranges").empty());
  } else {
    CHECK(doc.at("rej_ranges")[0].contains("from"));
  }
}

TEST_CASE("renderers are deterministic pure functions") {
  const auto g = distband::simlab::tail_outlier_fixture();
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.want_pvalue = true;
  config.reps = 1000;
  const auto r1 = run_comparison(config, g);
  const auto r2 = run_comparison(config, g);
  CHECK(render_text(r1) == render_text(r2));
  CHECK(render_json(r1) == render_json(r2));
  CHECK(render_svg(r1, g) == render_svg(r2, g));
}

TEST_CASE("SVG has the contracted structure") {
  const auto g = distband::simlab::separated_fixture();
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.alpha = 0.05;
  config.reps = 1000;
  const auto report = run_comparison(config, g);
  const auto svg = render_svg(report, g);

  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
        std::string::npos);

  std::size_t curves = 0;
  for (std::size_t pos = svg.find("class=\"ecdf\""); pos != std::string::npos;
       pos = svg.find("class=\"ecdf\"", pos + 1)) {
    ++curves;
  }
  CHECK(curves == 2);

  std::size_t bars = 0;
  for (std::size_t pos = svg.find("class=\"rejected-range\""); pos != std::string::npos;
       pos = svg.find("class=\"rejected-range\"", pos + 1)) {
    ++bars;
  }
  CHECK(bars == report.ranges.ranges.size());
  CHECK(svg.find("grp=0") != std::string::npos);
  CHECK(svg.find("grp=1") != std::string::npos);
}

TEST_CASE("empty-range SVG still draws both curves") {
  GroupedSamples g;
  g.label_x = "a";
  g.label_y = "b";
  g.x = {1.0, 2.0, 3.0};
  g.y = {1.5, 2.5, 3.5};
  RunConfig config;
  config.value_col = "y";
  config.group_col = "grp";
  config.reps = 1000;
  const auto report = run_comparison(config, g);
  REQUIRE(report.ranges.empty());
  const auto svg = render_svg(report, g);
  CHECK(svg.find("class=\"rejected-range\"") == std::string::npos);
  CHECK(svg.find("class=\"ecdf\"") != std::string::npos);
}
