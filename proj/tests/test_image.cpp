#include <fstream>

#include <gtest/gtest.h>
#include <png.h>

#include "test_util.hpp"
#include "veintex/image.hpp"

using namespace veintex;
using vt_test::error_kind_of;
using vt_test::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

} // namespace

TEST(GrayImage, RejectsInvalidConstruction) {
    EXPECT_EQ(error_kind_of([] { GrayImage(0, 3); }), ErrorKind::format);
    EXPECT_EQ(error_kind_of([] { GrayImage(2, 2, std::vector<double>{0.0, 0.5}); }), ErrorKind::structure);
    EXPECT_EQ(error_kind_of([] { GrayImage(1, 1, std::vector<double>{1.5}); }), ErrorKind::data);
    EXPECT_EQ(error_kind_of([] { GrayImage(1, 1, std::vector<double>{std::nan("")}); }), ErrorKind::data);
}

TEST(LoadImage, BinaryPgmEndpoints) {
    TempDir dir("img");
    write_bytes(dir / "a.pgm", std::string("P5\n2 1\n255\n") + '\x00' + '\xff');
    const auto img = load_image(dir / "a.pgm");
    ASSERT_EQ(img.width(), 2);
    ASSERT_EQ(img.height(), 1);
    EXPECT_EQ(img.data(), (std::vector<double>{0.0, 1.0}));
}

TEST(LoadImage, AsciiPgmConstant) {
    TempDir dir("img");
    std::string body = "P2\n# comment line\n4 4\n255\n";
    for (int i = 0; i < 16; ++i) body += "128 ";
    write_bytes(dir / "c.pgm", body);
    const auto img = load_image(dir / "c.pgm");
    ASSERT_EQ(img.data().size(), 16u);
    for (double v : img.data()) EXPECT_NEAR(v, 0.50196, 1e-5);
}

TEST(LoadImage, RgbPngUsesLumaWeights) {
    TempDir dir("img");
    const std::vector<png_byte> rgb = {255, 0, 0, 0, 255, 0, 0, 0, 255};
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = 3;
    image.height = 1;
    image.format = PNG_FORMAT_RGB;
    const auto path = (dir / "rgb.png").string();
    ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr));
    const auto img = load_image(path);
    ASSERT_EQ(img.width(), 3);
    EXPECT_NEAR(img(0, 0), 0.299, 1e-12);
    EXPECT_NEAR(img(1, 0), 0.587, 1e-12);
    EXPECT_NEAR(img(2, 0), 0.114, 1e-12);
}

TEST(LoadImage, ErrorKinds) {
    TempDir dir("img");
    EXPECT_EQ(error_kind_of([&] { load_image(dir / "missing.pgm"); }), ErrorKind::io);
    write_bytes(dir / "junk.png", "definitely not an image");
    EXPECT_EQ(error_kind_of([&] { load_image(dir / "junk.png"); }), ErrorKind::format);
    write_bytes(dir / "zero.pgm", "P5\n0 3\n255\n");
    EXPECT_EQ(error_kind_of([&] { load_image(dir / "zero.pgm"); }), ErrorKind::format);
    write_bytes(dir / "deep.pgm", "P5\n1 1\n65535\n\x01\x02");
    EXPECT_EQ(error_kind_of([&] { load_image(dir / "deep.pgm"); }), ErrorKind::format);
    write_bytes(dir / "short.pgm", "P5\n4 4\n255\nabc");
    EXPECT_EQ(error_kind_of([&] { load_image(dir / "short.pgm"); }), ErrorKind::format);
}

TEST(LoadImage, PgmAndPngRoundTripWithinQuantization) {
    TempDir dir("img");
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto img = vt_test::random_image(13, 7, seed);
        write_pgm(img, dir / "r.pgm");
        write_png(img, dir / "r.png");
        for (const auto* name : {"r.pgm", "r.png"}) {
            const auto back = load_image(dir / name);
            ASSERT_EQ(back.width(), 13);
            ASSERT_EQ(back.height(), 7);
            for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_LE(std::abs(back.data()[i] - img.data()[i]), 1.0 / 255);
        }
    }
}

TEST(Resize, ConstantStaysConstant) {
    const GrayImage img(5, 3, 0.3);
    for (auto [w, h] : {std::pair{1, 1}, {7, 9}, {2, 2}, {128, 64}}) {
        const auto out = resize_bilinear(img, w, h);
        ASSERT_EQ(out.width(), w);
        for (double v : out.data()) EXPECT_NEAR(v, 0.3, 1e-15);
    }
}

TEST(Resize, SameSizeIsIdentity) {
    const auto img = vt_test::random_image(2, 2, 11);
    EXPECT_EQ(preprocess(img, 2, 2, false), img);
}

TEST(Resize, ColumnOfTwoToFour) {
    const GrayImage img(1, 2, std::vector<double>{0.0, 1.0});
    const auto out = resize_bilinear(img, 1, 4);
    const std::vector<double> expected{0.0, 1.0 / 3, 2.0 / 3, 1.0};
    ASSERT_EQ(out.data().size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.data()[i], expected[i], 1e-15);
}

// Reference values from an independent order-1 spline interpolation evaluated
// at corner-aligned sample coordinates.
TEST(Resize, MatchesIndependentInterpolation) {
    std::vector<double> v;
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) v.push_back(((3 * x + 5 * y) % 7) / 6.0);
    }
    const GrayImage img(4, 3, v);
    const std::vector<double> up = {
        0.0, 0.25, 0.5, 0.75, 1.0, 0.6666666666666666, 0.3333333333333333,
        0.4166666666666667, 0.37500000000000006, 0.3333333333333333, 0.5833333333333334, 0.8333333333333333, 0.5, 0.16666666666666666,
        0.8333333333333334, 0.5, 0.16666666666666666, 0.41666666666666663, 0.6666666666666666, 0.3333333333333333, 0.0,
        0.6666666666666667, 0.625, 0.5833333333333334, 0.5416666666666666, 0.5, 0.45833333333333337, 0.4166666666666667,
        0.5, 0.75, 1.0, 0.6666666666666666, 0.3333333333333333, 0.5833333333333334, 0.8333333333333334};
    const std::vector<double> down = {0.0, 0.75, 0.3333333333333333, 0.5, 0.6666666666666666, 0.8333333333333334};
    const auto a = resize_bilinear(img, 7, 5);
    const auto b = resize_bilinear(img, 3, 2);
    ASSERT_EQ(a.data().size(), up.size());
    ASSERT_EQ(b.data().size(), down.size());
    for (std::size_t i = 0; i < up.size(); ++i) EXPECT_NEAR(a.data()[i], up[i], 1e-12) << i;
    for (std::size_t i = 0; i < down.size(); ++i) EXPECT_NEAR(b.data()[i], down[i], 1e-12) << i;
}

TEST(Resize, RejectsNonPositiveTarget) {
    const GrayImage img(2, 2, 0.5);
    EXPECT_EQ(error_kind_of([&] { resize_bilinear(img, 0, 2); }), ErrorKind::parameter);
    EXPECT_EQ(error_kind_of([&] { preprocess(img, 2, -1, true); }), ErrorKind::parameter);
}

TEST(Equalize, SpreadsLevelsAndKeepsSingleBinImages) {
    const GrayImage flat(4, 4, 0.4);
    EXPECT_EQ(equalize_histogram(flat), flat);

    const GrayImage two(2, 1, std::vector<double>{0.2, 0.3});
    const auto eq = equalize_histogram(two);
    EXPECT_EQ(eq.data(), (std::vector<double>{0.0, 1.0}));

    const auto img = vt_test::random_image(16, 16, 5, 0.3, 0.6);
    const auto out = equalize_histogram(img);
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        for (std::size_t j = 0; j < img.data().size(); ++j) {
            if (img.data()[i] < img.data()[j]) {
                ASSERT_LE(out.data()[i], out.data()[j]);
            }
        }
    }
    EXPECT_EQ(*std::min_element(out.data().begin(), out.data().end()), 0.0);
    EXPECT_EQ(*std::max_element(out.data().begin(), out.data().end()), 1.0);
}

TEST(Preprocess, EqualizesBeforeResizing) {
    const auto img = vt_test::random_image(9, 6, 2);
    const auto out = preprocess(img, PreprocessOptions{20, 10, true});
    EXPECT_EQ(out, resize_bilinear(equalize_histogram(img), 20, 10));
    EXPECT_EQ(preprocess(img, 20, 10, false), resize_bilinear(img, 20, 10));
}
