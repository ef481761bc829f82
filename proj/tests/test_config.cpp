#include "weldgroove/error.hpp"
#include "weldgroove/pipeline.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace weldgroove;

TEST(Config, DefaultsRoundTrip) {
    const PipelineConfig c;
    const auto text = emit_config(c);
    EXPECT_EQ(emit_config(parse_config(text)), text);
    EXPECT_EQ(c.segments, 55u);
    EXPECT_EQ(c.gd.tolerance, 1e-4);
    EXPECT_EQ(c.gd.max_iterations, 1000u);
    EXPECT_EQ(c.threshold_mode, ThresholdMode::Otsu);
}

TEST(Config, CustomValuesRoundTrip) {
    PipelineConfig c;
    c.mls_enabled = false;
    c.mls_radius = 0.0061;
    c.mls_order = 1;
    c.normal_radius = 0.1 + 0.2;  // not exactly representable in short decimal
    c.viewpoint = Point3(0.1, -0.2, 0.3);
    c.gfh_radius = 0.004;
    c.threshold_mode = ThresholdMode::Fixed;
    c.threshold_value = 4.75;
    c.denoise_enabled = false;
    c.denoise_min_cluster = 7;
    c.denoise_cluster_radius = 0.003;
    c.segments = 60;
    c.reverse = true;
    c.gd.tolerance = 1e-6;
    c.gd.max_iterations = 50;
    c.threads = 3;
    c.output_dir = "out/run 1";
    const auto text = emit_config(c);
    const auto back = parse_config(text);
    EXPECT_EQ(emit_config(back), text);
    EXPECT_EQ(*back.normal_radius, 0.1 + 0.2);
    EXPECT_EQ(*back.viewpoint, Point3(0.1, -0.2, 0.3));
    EXPECT_EQ(back.output_dir, "out/run 1");
    EXPECT_TRUE(back.reverse);
}

TEST(Config, PartialTextKeepsDefaults) {
    const auto c = parse_config("# comment\n\ngfh.radius = 0.005\nthreshold.mode = fixed\nthreshold.value = 4.5\n");
    EXPECT_EQ(*c.gfh_radius, 0.005);
    EXPECT_EQ(c.threshold_mode, ThresholdMode::Fixed);
    EXPECT_EQ(c.threshold_value, 4.5);
    EXPECT_FALSE(c.mls_radius.has_value());
    EXPECT_EQ(c.segments, 55u);
}

TEST(Config, JsonForm) {
    const auto c = parse_config(R"({"mls": {"radius": 0.006, "order": 1}, "normals": {"viewpoint": [0, 0, 2]},
                                    "gfh": {"radius": null}, "trajectory": {"segments": 50}, "threads": 1})");
    EXPECT_EQ(*c.mls_radius, 0.006);
    EXPECT_EQ(c.mls_order, 1);
    EXPECT_EQ(*c.viewpoint, Point3(0, 0, 2));
    EXPECT_FALSE(c.gfh_radius.has_value());
    EXPECT_EQ(c.segments, 50u);
    EXPECT_EQ(c.threads, 1u);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("mls.radiu = 1\n"), ParseError);
    EXPECT_THROW(parse_config("gfh.radius = 1\ngfh.radius = 2\n"), ParseError);
    EXPECT_THROW(parse_config("gfh.radius\n"), ParseError);
    EXPECT_THROW(parse_config("gfh.radius = abc\n"), ParseError);
    EXPECT_THROW(parse_config("gfh.radius = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("mls.order = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("threshold.mode = median\n"), ConfigError);
    EXPECT_THROW(parse_config("threshold.mode = fixed\n"), ConfigError);
    EXPECT_THROW(parse_config("trajectory.segments = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("normals.viewpoint = 1 2\n"), ParseError);
    EXPECT_THROW(parse_config("mls.enabled = maybe\n"), ParseError);
    EXPECT_THROW(parse_config("{\"gfh\": "), ParseError);
    EXPECT_THROW(parse_config("[1, 2]"), ParseError);
}

TEST(Config, ErrorsCarryLineNumbers) {
    try {
        parse_config("gfh.radius = 0.004\n\nbogus = 1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Config, LoadFromFile) {
    const auto dir = fixtures::scratch_dir("config");
    {
        std::ofstream out(dir / "c.cfg");
        out << "trajectory.segments = 58\n";
    }
    EXPECT_EQ(load_config(dir / "c.cfg").segments, 58u);
    EXPECT_THROW(load_config(dir / "missing.cfg"), IoError);
}
