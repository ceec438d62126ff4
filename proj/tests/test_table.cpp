#include <bit>
#include <cmath>
#include <cstring>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "symdistill/table.hpp"
#include "test_util.hpp"

using namespace symdistill;

namespace {

IOTable small_table()
{
    IOTable t;
    t.input_names = {"a", "b"};
    t.output_names = {"u"};
    t.x = Matrix::from_rows({{0.1, -2.5}, {1e-300, 3.0}, {-0.0, 1.0 / 3.0}});
    t.y = Matrix::from_rows({{7.0}, {std::nextafter(1.0, 2.0)}, {-1e17}});
    return t;
}

bool same_bits(const Matrix& a, const Matrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols()
        && std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(double)) == 0;
}

} // namespace

TEST(Table, BinaryRoundTripIsBitExact)
{
    TempDir dir;
    const auto t = small_table();
    save_table(t, dir.path() / "tbl");
    const auto back = load_table(dir.path() / "tbl");
    EXPECT_EQ(back.input_names, t.input_names);
    EXPECT_EQ(back.output_names, t.output_names);
    EXPECT_TRUE(same_bits(back.x, t.x));
    EXPECT_TRUE(same_bits(back.y, t.y));
    EXPECT_TRUE(back.weights.empty());
}

TEST(Table, WeightsRoundTrip)
{
    TempDir dir;
    auto t = small_table();
    t.weights = {1.0, 0.5, 0.25};
    save_table(t, dir.path() / "tbl");
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "tbl" / "weights.bin"));
    EXPECT_EQ(load_table(dir.path() / "tbl").weights, t.weights);
}

TEST(Table, PayloadIsLittleEndianRowMajor)
{
    TempDir dir;
    const auto root = dir.path() / "tbl";
    std::filesystem::create_directories(root);
    spit(root / "manifest.json",
        R"({"format_version":1,"rows":2,"input_names":["p","q"],"output_names":["r"],"dtype":"f64le","layout":"row-major"})");
    auto le = [](double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        std::string s(8, '\0');
        for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xff);
        return s;
    };
    spit(root / "inputs.bin", le(1.0) + le(2.0) + le(3.0) + le(4.0));
    spit(root / "outputs.bin", le(-1.0) + le(-2.0));
    const auto t = load_table(root);
    ASSERT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.x(0, 1), 2.0);
    EXPECT_EQ(t.x(1, 0), 3.0);
    EXPECT_EQ(t.y(1, 0), -2.0);
}

TEST(Table, CsvShape)
{
    TempDir dir;
    std::string text = "in:x,in:t,out:u\n";
    for (int i = 0; i < 10; ++i) text += std::to_string(i * 0.1) + "," + std::to_string(i) + "," + std::to_string(-i) + "\n";
    spit(dir.path() / "heat.csv", text);
    const auto t = load_table(dir.path() / "heat.csv");
    EXPECT_EQ(t.inputs(), 2u);
    EXPECT_EQ(t.outputs(), 1u);
    EXPECT_EQ(t.rows(), 10u);
    EXPECT_EQ(t.input_names[1], "t");
    EXPECT_EQ(t.y(9, 0), -9.0);
}

TEST(Table, CsvRoundTrip)
{
    TempDir dir;
    auto t = small_table();
    t.weights = {1.0, 2.0, 3.0};
    save_csv(t, dir.path() / "t.csv");
    const auto back = load_table(dir.path() / "t.csv");
    EXPECT_TRUE(same_bits(back.x, t.x));
    EXPECT_TRUE(same_bits(back.y, t.y));
    EXPECT_EQ(back.weights, t.weights);
}

TEST(Table, RowCountMismatchNamesBothCounts)
{
    TempDir dir;
    IOTable t;
    t.input_names = {"a"};
    t.output_names = {"b"};
    t.x = Matrix(100, 1);
    t.y = Matrix(100, 1);
    const auto root = dir.path() / "tbl";
    save_table(t, root);
    auto bytes = slurp(root / "inputs.bin");
    bytes.resize(99 * 8);
    spit(root / "inputs.bin", bytes);
    try {
        (void)load_table(root);
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("100"), std::string::npos) << msg;
        EXPECT_NE(msg.find("99"), std::string::npos) << msg;
    }
}

TEST(Table, NonFiniteRejectedUnlessAllowed)
{
    TempDir dir;
    auto t = small_table();
    t.x(1, 1) = std::nan("");
    save_table(t, dir.path() / "tbl");
    EXPECT_THROW((void)load_table(dir.path() / "tbl"), DataError);
    const auto ok = load_table(dir.path() / "tbl", LoadOptions{true});
    EXPECT_TRUE(std::isnan(ok.x(1, 1)));
}

TEST(Table, ValidationErrors)
{
    auto t = small_table();
    t.input_names = {"a", "a"};
    EXPECT_THROW(t.validate(), DataError);
    t = small_table();
    t.output_names = {};
    EXPECT_THROW(t.validate(), DataError);
    t = small_table();
    t.weights = {1.0};
    EXPECT_THROW(t.validate(), DataError);
    TempDir dir;
    spit(dir.path() / "bad.csv", "in:x,y\n1,2\n");
    EXPECT_THROW((void)load_table(dir.path() / "bad.csv"), DataError);
    EXPECT_THROW((void)load_table(dir.path() / "missing"), DataError);
}
