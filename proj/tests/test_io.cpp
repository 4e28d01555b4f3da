#include "kerrsqueeze/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace kerrsqueeze;
using namespace kerrsqueeze::io;

namespace fs = std::filesystem;

TEST(Numbers, FormatAndParse) {
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_short(0.05), "0.05");
    EXPECT_EQ(parse_number(" 1.25\r"), 1.25);
    EXPECT_TRUE(std::isnan(parse_number("nan")));
    EXPECT_THROW(parse_number("1.2x"), ConfigError);
    EXPECT_THROW(parse_number(""), ConfigError);
    for (double v : {0.1, 1e-300, 123456.789, -2.5e10}) {
        EXPECT_NEAR(parse_number(format_number(v)), v, 1e-11 * std::abs(v));
    }
}

TEST(Csv, RoundTrip) {
    const Table t{{"alpha", "xi", "chi"}, {{0.1, 0.98, 1.0}, {0.2, 0.87, 0.5}}};
    const std::string text = to_csv(t);
    EXPECT_EQ(text, "alpha,xi,chi\n0.1,0.98,1\n0.2,0.87,0.5\n");
    const Table back = parse_csv(text);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.column("chi"), 2u);
    EXPECT_THROW(back.column("beta"), ConfigError);
}

TEST(Csv, RejectsMalformedInput) {
    EXPECT_THROW(parse_csv(""), ConfigError);
    EXPECT_THROW(parse_csv("a,b\n"), ConfigError);
    EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), ConfigError);
    EXPECT_THROW(parse_csv("a,b\n1,zz\n"), ConfigError);
    EXPECT_NO_THROW(parse_csv("a,b\r\n1,2\r\n"));
}

TEST(Hash, MatchesGitBlobIds) {
    EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Files, AtomicWriteReplacesContent) {
    const fs::path dir = fs::temp_directory_path() / "kerrsqueeze_io_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path file = dir / "out.csv";
    write_atomic(file, "first\n");
    write_atomic(file, "second\n");
    EXPECT_EQ(read_file(file), "second\n");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) {
        ++entries;
    }
    EXPECT_EQ(entries, 1u);
    EXPECT_THROW(read_file(dir / "missing.csv"), Error);
    fs::remove_all(dir);
}

TEST(PlotData, TidyLongForm) {
    const Table sweep{{"alpha", "xi"}, {{0.5, 0.7}}};
    EXPECT_EQ(tidy_csv(sweep), "x,series,value\n0.5,xi,0.7\n");
    const Table mc{{"primary_param", "mean_xi", "sigma_plus", "sigma_minus"}, {{1.0, 0.5, 0.25, 0.125}}};
    EXPECT_TRUE(is_mc_table(mc));
    EXPECT_EQ(tidy_csv(mc), "x,series,value\n1,lower,0.375\n1,mean,0.5\n1,upper,0.75\n");
}

TEST(PlotData, SvgHasOneShapePerSeries) {
    const Table sweep{{"alpha", "xi", "chi"}, {{0.1, 0.9, 1.0}, {0.2, 0.8, 0.7}, {0.3, 0.7, 0.6}}};
    const std::string s = svg(sweep);
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("data-series=\"xi\""), std::string::npos);
    EXPECT_NE(s.find("data-series=\"chi\""), std::string::npos);
    const Table mc{{"primary_param", "mean_xi", "sigma_plus", "sigma_minus"}, {{1.0, 0.5, 0.1, 0.1}, {2.0, 0.4, 0.1, 0.1}}};
    const std::string band = svg(mc);
    EXPECT_NE(band.find("class=\"band\""), std::string::npos);
    EXPECT_NE(band.find("class=\"series\""), std::string::npos);
}
