#include "doctest.h"

#include <tuple>

#include "ggs/imageops.hpp"
#include "ggs/rng.hpp"

using namespace ggs;

namespace {

Tensor random_tensor(int c, int h, int w, Rng& rng) {
    Tensor t(c, h, w);
    for (double& v : t.raw()) v = rng.uniform();
    return t;
}

} // namespace

TEST_SUITE("imageops") {

TEST_CASE("bilinear resize to the same size is an exact copy") {
    Rng rng(11);
    Tensor src = random_tensor(3, 7, 5, rng);
    Tensor dst = bilinear_resize(src, 7, 5);
    REQUIRE(dst.same_shape(src));
    for (std::size_t i = 0; i < src.size(); ++i) CHECK(dst.raw()[i] == src.raw()[i]);
}

TEST_CASE("bilinear resize of a constant image stays constant") {
    Tensor src(2, 6, 9, 0.37);
    for (auto [h, w] : {std::pair{12, 12}, {3, 20}, {17, 2}}) {
        Tensor dst = bilinear_resize(src, h, w);
        for (double v : dst.raw()) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
    }
}

TEST_CASE("bilinear resize backward is the exact adjoint of forward") {
    // <resize(x), y> must equal <x, resize_backward(y)> for the pair to be
    // a consistent linear map and its transpose
    Rng rng(5);
    const std::tuple<int, int, int, int> shapes[] = {{8, 8, 5, 11}, {4, 9, 13, 3}, {6, 6, 6, 6}};
    for (auto [sh, sw, dh, dw] : shapes) {
        Tensor x = random_tensor(2, sh, sw, rng);
        Tensor y = random_tensor(2, dh, dw, rng);

        Tensor fx = bilinear_resize(x, dh, dw);
        Tensor bty(2, sh, sw);
        bilinear_resize_backward(y, bty);

        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < fx.size(); ++i) lhs += fx.raw()[i] * y.raw()[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += x.raw()[i] * bty.raw()[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("bilinear resize backward accumulates into the target") {
    Tensor g(1, 2, 2, 1.0);
    Tensor acc(1, 4, 4, 0.5);
    bilinear_resize_backward(g, acc);
    double sum = 0.0;
    for (double v : acc.raw()) sum += v;
    // previous content (16 * 0.5) plus the full scattered mass (4 * 1)
    CHECK(sum == doctest::Approx(8.0 + 4.0).epsilon(1e-12));
}

TEST_CASE("nearest resize doubles then halves back to the original mask") {
    Mask m(3, 4);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) m.at(y, x) = y * 4 + x;
    Mask up = nearest_resize(m, 6, 8);
    Mask down = nearest_resize(up, 3, 4);
    CHECK(down.raw() == m.raw());
    // upsampled values can only come from the source value set
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) CHECK(up.at(y, x) == m.at(y / 2, x / 2));
}

TEST_CASE("crop extracts the requested window") {
    Rng rng(3);
    Tensor src = random_tensor(2, 8, 9, rng);
    Tensor out = crop(src, 3, 2, 4, 5);
    REQUIRE(out.height() == 4);
    REQUIRE(out.width() == 5);
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x) CHECK(out.at(c, y, x) == src.at(c, 2 + y, 3 + x));
}

TEST_CASE("crop rejects empty and out-of-bounds boxes") {
    Tensor src(1, 4, 4);
    CHECK_THROWS_AS(crop(src, 0, 0, 0, 2), UsageError);
    CHECK_THROWS_AS(crop(src, 3, 0, 2, 2), UsageError);
    CHECK_THROWS_AS(crop(src, -1, 0, 2, 2), UsageError);
    Mask m(4, 4);
    CHECK_THROWS_AS(crop(m, 0, 3, 2, 2), UsageError);
}

TEST_CASE("flips are involutions and reorder pixels exactly") {
    Rng rng(7);
    Tensor src = random_tensor(3, 5, 6, rng);
    Tensor h = src;
    flip_horizontal_inplace(h);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 6; ++x) CHECK(h.at(c, y, x) == src.at(c, y, 5 - x));
    flip_horizontal_inplace(h);
    CHECK(h.raw() == src.raw());

    Tensor v = src;
    flip_vertical_inplace(v);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 6; ++x) CHECK(v.at(c, y, x) == src.at(c, 4 - y, x));
    flip_vertical_inplace(v);
    CHECK(v.raw() == src.raw());
}

TEST_CASE("gaussian blur keeps a constant image constant") {
    Tensor src(3, 9, 9, 0.42);
    Tensor out = gaussian_blur(src, 1.3);
    for (double v : out.raw()) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("clamp01 clips out-of-range values in place") {
    Tensor t(1, 1, 4);
    t.raw() = {-0.5, 0.0, 0.7, 1.9};
    clamp01_inplace(t);
    CHECK(t.raw() == std::vector<double>{0.0, 0.0, 0.7, 1.0});
}

} // TEST_SUITE
