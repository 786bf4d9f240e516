#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "sonarcursor/errors.hpp"
#include "sonarcursor/report.hpp"

using namespace sonar;

TEST_CASE("numbers format compactly and stably") {
  CHECK(fmt_num(0.5) == "0.5");
  CHECK(fmt_num(2.0) == "2");
  CHECK(fmt_num(0.0) == "0");
  CHECK(fmt_num(-0.0) == "0");  // negative zero normalized
  CHECK(fmt_num(1234.5) == "1234.5");
  CHECK(fmt_num(1e-9) == "1e-09");
  CHECK(fmt_num(-3.25) == "-3.25");
}

TEST_CASE("hash primitives match the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(hash_hex("") == "cbf29ce484222325");
  CHECK(hash_hex("abc") != hash_hex("abd"));
}

TEST_CASE("metadata comment block is exact") {
  ReportMeta meta;
  meta.schema_version = 1;
  meta.seed = 42;
  meta.config_hash = "cafe";
  CHECK(meta_comment(meta) == "# schema_version=1\n# seed=42\n# config_hash=cafe\n");
}

TEST_CASE("svg charts are self-contained and deterministic") {
  std::vector<SvgSeries> series(1);
  series[0].label = "err";
  series[0].points = {{0.0, 1.0}, {40.0, 2.5}, {80.0, 7.0}};
  const std::string a = svg_line_chart("title", "offset", "pct", series);
  const std::string b = svg_line_chart("title", "offset", "pct", series);
  CHECK(a == b);
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("<desc>") != std::string::npos);  // numbers embedded as CSV
  CHECK(a.find("40") != std::string::npos);

  const std::string bars = svg_grouped_bars("t", "y", {"g1", "g2"},
                                            {{"s", {1.0, 2.0}}});
  CHECK(bars.find("<svg") != std::string::npos);
  CHECK(bars.find("</svg>") != std::string::npos);

  const std::string fitsvg = svg_scatter_fit("t", "x", "y",
                                             {{1.0, 0.6}, {2.0, 1.1}}, 0.1, 0.5);
  CHECK(fitsvg.find("<svg") != std::string::npos);
  CHECK(fitsvg.find("</svg>") != std::string::npos);
}

TEST_CASE("text files write what they are given, or refuse loudly") {
  const std::string path = "reporttest_out.txt";
  write_text_file(path, "line\n");
  FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  char buf[16] = {};
  const size_t n = std::fread(buf, 1, sizeof buf, f);
  std::fclose(f);
  std::remove(path.c_str());
  CHECK(std::string(buf, n) == "line\n");

  CHECK_THROWS_AS(write_text_file("no_such_dir_xyz/out.txt", "x"), ConfigError);
}
