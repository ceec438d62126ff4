#include <cmath>

#include <gtest/gtest.h>

#include "symdistill/transforms.hpp"

using namespace symdistill;

namespace {

IOTable pair_table()
{
    IOTable t;
    t.input_names = {"dx", "dy", "m"};
    t.output_names = {"f"};
    t.x = Matrix::from_rows({{3.0, 4.0, 1.0}, {-1.0, 0.0, 2.0}, {0.5, -0.5, 3.0}});
    t.y = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
    return t;
}

} // namespace

TEST(Transforms, SoftenedDistance)
{
    const auto out = apply_transforms(pair_table(), {parse_transform("r = sqrt((dx*dx) + (dy*dy)) + 0.01")});
    ASSERT_EQ(out.input_names.back(), "r");
    EXPECT_NEAR(out.x(0, 3), 5.01, 1e-12);
    EXPECT_NEAR(out.x(1, 3), 1.01, 1e-12);
}

TEST(Transforms, EmptyListIsIdentity)
{
    const auto t = pair_table();
    const auto out = apply_transforms(t, {});
    EXPECT_EQ(out.input_names, t.input_names);
    EXPECT_EQ(out.x.values(), t.x.values());
    EXPECT_EQ(out.y.values(), t.y.values());
}

TEST(Transforms, StrictModeListsBadRows)
{
    try {
        (void)apply_transforms(pair_table(), {parse_transform("l = log(dx)")});
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("rows 1"), std::string::npos) << msg;
        EXPECT_EQ(msg.find("0,"), std::string::npos) << msg;
    }
    TransformOptions lax;
    lax.strict = false;
    const auto out = apply_transforms(pair_table(), {parse_transform("l = log(dx)")}, lax);
    EXPECT_TRUE(std::isnan(out.x(1, 3)));
}

TEST(Transforms, InputNotMutatedAndChaining)
{
    const auto t = pair_table();
    const auto before = t.x.values();
    const auto out = apply_transforms(t, {parse_transform("r2 = (dx*dx) + (dy*dy)"), parse_transform("r = sqrt(r2)")});
    EXPECT_EQ(t.x.values(), before);
    EXPECT_EQ(t.input_names.size(), 3u);
    EXPECT_DOUBLE_EQ(out.x(0, 4), 5.0);
}

TEST(Transforms, DropColumns)
{
    TransformOptions opts;
    opts.drop = {"dx", "dy"};
    const auto out = apply_transforms(pair_table(), {parse_transform("r = sqrt((dx*dx) + (dy*dy))")}, opts);
    EXPECT_EQ(out.input_names, (std::vector<std::string>{"m", "r"}));
    EXPECT_DOUBLE_EQ(out.x(0, 1), 5.0);
    EXPECT_DOUBLE_EQ(out.x(2, 0), 3.0);
}

TEST(Transforms, Errors)
{
    EXPECT_THROW((void)apply_transforms(pair_table(), {parse_transform("z = q + 1")}), StructuralError);
    EXPECT_THROW((void)apply_transforms(pair_table(), {parse_transform("m = dx")}), StructuralError);
    TransformOptions opts;
    opts.drop = {"nope"};
    EXPECT_THROW((void)apply_transforms(pair_table(), {}, opts), StructuralError);
    opts.drop = {"dx", "dy", "m"};
    EXPECT_THROW((void)apply_transforms(pair_table(), {}, opts), StructuralError);
    EXPECT_THROW((void)parse_transform("no equals sign"), ConfigError);
}
