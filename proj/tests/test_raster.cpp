#include <doctest.h>

#include "cyclegate/raster.hpp"
#include "test_util.hpp"

using namespace cyclegate;
using namespace cyclegate::testutil;

namespace {

BinaryMask rows_mask(int w, int h, int row_begin, int row_end) {
    BinaryMask m(w, h);
    for (int y = row_begin; y < row_end; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, true);
    return m;
}

}  // namespace

TEST_CASE("iou identity and disjoint cases") {
    BinaryMask a = rows_mask(4, 4, 0, 2);
    CHECK(iou(a, a) == 1.0);

    BinaryMask b = rows_mask(4, 4, 2, 4);
    CHECK(iou(a, b) == 0.0);
}

TEST_CASE("iou overlapping rows: intersection 4, union 12") {
    BinaryMask a = rows_mask(4, 4, 0, 2);
    BinaryMask b = rows_mask(4, 4, 1, 3);
    CHECK(iou(a, b) == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
    CHECK(iou(a, b) == oracle_iou(a, b));
}

TEST_CASE("iou of two empty masks is 1 by convention") {
    BinaryMask a(3, 3), b(3, 3);
    CHECK(iou(a, b) == 1.0);
}

TEST_CASE("iou dimension mismatch names both shapes") {
    BinaryMask a(4, 4), b(4, 5);
    CHECK_THROWS_WITH_AS(iou(a, b), doctest::Contains("4x4"), Error);
    CHECK_THROWS_WITH_AS(iou(a, b), doctest::Contains("4x5"), Error);
}

TEST_CASE("miou modes on the 4x4 rows example") {
    BinaryMask a = rows_mask(4, 4, 0, 2);
    BinaryMask b = rows_mask(4, 4, 1, 3);
    CHECK(miou(a, a, MiouMode::ForegroundOnly) == 1.0);
    CHECK(miou(a, a, MiouMode::TwoClassMean) == 1.0);
    CHECK(miou(a, b, MiouMode::ForegroundOnly) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // background intersection 4 (row 3), union 12
    CHECK(miou(a, b, MiouMode::TwoClassMean) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("response rate") {
    BinaryMask empty(10, 10);
    CHECK(response_rate(empty) == 0.0);

    BinaryMask full(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) full.set(x, y, true);
    CHECK(response_rate(full) == 1.0);

    BinaryMask seven(10, 10);
    for (int i = 0; i < 7; ++i) seven.set(i, 0, true);
    CHECK(response_rate(seven) == doctest::Approx(0.07).epsilon(1e-12));
}

TEST_CASE("resize identity is bitwise") {
    CounterRng rng(11, 0);
    Raster r = random_raster(rng, 17, 9, 3);
    CHECK(resize_nearest(r, 17, 9) == r);
    BinaryMask m = random_mask(rng, 17, 9);
    CHECK(resize_nearest_mask(m, 17, 9) == m);
}

TEST_CASE("mask upscale 2x2 -> 4x4 expands blocks") {
    BinaryMask m(2, 2);
    m.set(0, 0, true);
    BinaryMask up = resize_nearest_mask(m, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(up.at(x, y) == (x < 2 && y < 2));
}

TEST_CASE("downscale 4x4 -> 2x2 samples source indices 0 and 2") {
    Raster r(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) r.set(x, y, 0, static_cast<std::uint8_t>(16 * y + x));
    Raster down = resize_nearest(r, 2, 2);
    CHECK(down.at(0, 0) == 0);
    CHECK(down.at(1, 0) == 2);
    CHECK(down.at(0, 1) == 32);
    CHECK(down.at(1, 1) == 34);
}

TEST_CASE("resize rejects zero targets") {
    Raster r(2, 2, 1);
    CHECK_THROWS_AS(resize_nearest(r, 0, 2), Error);
    CHECK_THROWS_AS(resize_nearest_mask(BinaryMask(2, 2), 2, 0), Error);
}

TEST_CASE("hflip basics") {
    Raster row(3, 1, 1, {10, 20, 30});
    Raster flipped = hflip(row);
    CHECK(flipped.at(0, 0) == 30);
    CHECK(flipped.at(1, 0) == 20);
    CHECK(flipped.at(2, 0) == 10);

    Raster symmetric(3, 1, 1, {5, 9, 5});
    CHECK(hflip(symmetric) == symmetric);
}

TEST_CASE("metric properties against the counting oracle") {
    CounterRng rng(2024, 1);
    for (int trial = 0; trial < 2000; ++trial) {
        int w = 1 + static_cast<int>(rng.next_below(64));
        int h = 1 + static_cast<int>(rng.next_below(64));
        double density = rng.next_double();
        BinaryMask a = random_mask(rng, w, h, density);
        BinaryMask b = random_mask(rng, w, h, density);

        double ab = iou(a, b);
        CHECK(ab == oracle_iou(a, b));
        CHECK(miou(a, b, MiouMode::TwoClassMean) == oracle_miou_two_class(a, b));
        CHECK(response_rate(a) == oracle_response_rate(a));

        // symmetry, range, identity
        CHECK(ab == iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou(a, a) == 1.0);
        CHECK(miou(a, b, MiouMode::ForegroundOnly) == ab);

        // iou(a,b) = 1 implies bitwise equality
        if (ab == 1.0) CHECK(a == b);
        // response_rate(m) = 0 iff null mask
        CHECK((response_rate(a) == 0.0) == a.empty_mask());

        // involution and identity resize
        CHECK(hflip_mask(hflip_mask(a)) == a);
        CHECK(resize_nearest_mask(a, w, h) == a);
    }
}

TEST_CASE("raster invariants are enforced") {
    CHECK_THROWS_AS(Raster(0, 4, 1), Error);
    CHECK_THROWS_AS(Raster(4, 4, 2), Error);
    CHECK_THROWS_AS(Raster(2, 2, 1, {1, 2, 3}), Error);
    CHECK_THROWS_AS(BinaryMask(2, 2, std::vector<bool>{true}), Error);
}
