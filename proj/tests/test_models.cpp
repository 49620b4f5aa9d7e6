#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "models.hpp"
#include "rng.hpp"

using namespace orchard;
using orchard::rng::SplitMix64;

namespace {

ModelParams base_params() {
    ModelParams p;
    p.pl0_db = 31.22;
    p.exponent = 2.0;
    p.canopy_loss_db = 1.5;
    return p;
}

Layout table_layout() {
    return Layout(6, 7, 7.12, 7.12, 4.16, Point2D{0.0, 0.0});
}

}  // namespace

TEST_CASE("free-space loss at 868 MHz matches hand-computed references") {
    CHECK(std::fabs(fspl(868.0, 1.0) - 31.22) <= 0.01);
    CHECK(std::fabs(fspl(868.0, 1.0) - 31.220394503529842) < 1e-9);
    CHECK(std::fabs(fspl(868.0, 10.0) - 51.220394503529846) < 1e-9);
    CHECK(std::fabs(fspl(868.0, 38.0) - 62.81606643586605) < 1e-9);
    // 20 dB per decade.
    CHECK(fspl(868.0, 100.0) - fspl(868.0, 10.0) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("free-space loss short-range policy") {
    // Sub-reference distances clamp to the 1 m reference by default.
    CHECK(fspl(868.0, 0.5) == fspl(868.0, 1.0));
    CHECK(fspl(868.0, 0.0) == fspl(868.0, 1.0));
    CHECK_THROWS_AS(fspl(868.0, 0.5, ShortRangePolicy::Strict), Error);
    CHECK_THROWS_AS(fspl(868.0, 0.0, ShortRangePolicy::Strict), Error);
    // Negative or non-finite input is invalid under both policies.
    CHECK_THROWS_AS(fspl(868.0, -1.0), Error);
    CHECK_THROWS_AS(fspl(868.0, std::nan("")), Error);
    CHECK_THROWS_AS(fspl(0.0, 10.0), Error);
    CHECK_THROWS_AS(fspl(-868.0, 10.0), Error);
}

TEST_CASE("vegetation excess loss values and validity flag") {
    CHECK(std::fabs(itu_vegetation_loss(868.0, 1.0) - 1.5226003076779484) < 1e-9);
    CHECK(std::fabs(itu_vegetation_loss(868.0, 38.0) - 13.50380230216111) < 1e-9);
    // Zero foliage depth contributes nothing.
    CHECK(itu_vegetation_loss(868.0, 0.0) == 0.0);

    bool beyond = false;
    itu_vegetation_loss(868.0, 399.99, &beyond);
    CHECK_FALSE(beyond);
    itu_vegetation_loss(868.0, 400.0, &beyond);
    CHECK(beyond);
    const double at400 = itu_vegetation_loss(868.0, 400.0, &beyond);
    CHECK(std::isfinite(at400));
    CHECK(at400 > 0.0);

    CHECK_THROWS_AS(itu_vegetation_loss(868.0, -1.0), Error);
    CHECK_THROWS_AS(itu_vegetation_loss(0.0, 10.0), Error);
}

TEST_CASE("combined itu loss equals free-space plus vegetation excess") {
    CHECK(std::fabs(itu_total(868.0, 1.0) - 32.742994811207794) < 1e-9);
    CHECK(std::fabs(itu_total(868.0, 38.0) - 76.31986873802715) < 1e-9);

    for (double d : {1.0, 5.0, 38.0, 120.0, 399.0, 1000.0}) {
        const double total = itu_total(868.0, d);
        const double parts = fspl(868.0, d) + itu_vegetation_loss(868.0, d);
        CHECK(std::fabs(total - parts) < 1e-12);
    }
    // Sub-reference distances clamp both terms at the same effective distance.
    CHECK(itu_total(868.0, 0.3) == itu_total(868.0, 1.0));
    CHECK_THROWS_AS(itu_total(868.0, 0.3, ShortRangePolicy::Strict), Error);

    bool beyond = false;
    itu_total(868.0, 500.0, ShortRangePolicy::Clamp, &beyond);
    CHECK(beyond);
}

TEST_CASE("multi-wall loss adds per-obstacle penalties to a 20 dB/decade slope") {
    ModelParams p = base_params();
    CHECK(multiwall(p, 10.0, {3.0, 3.0}) == doctest::Approx(57.22).epsilon(1e-12));
    // No walls reduces to the one-slope reference curve.
    CHECK(multiwall(p, 1.0, {}) == doctest::Approx(31.22).epsilon(1e-12));
    CHECK(multiwall(p, 2.0, {}) - multiwall(p, 1.0, {}) ==
          doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK(multiwall(p, 1.0, {5.0}) == doctest::Approx(36.22).epsilon(1e-12));

    CHECK(multiwall(p, 0.5, {}) == multiwall(p, 1.0, {}));
    CHECK_THROWS_AS(multiwall(p, 0.5, {}, ShortRangePolicy::Strict), Error);
    CHECK_THROWS_AS(multiwall(p, 10.0, {std::nan("")}), Error);
    CHECK_THROWS_AS(multiwall(p, -2.0, {}), Error);
}

TEST_CASE("canopy-count loss model values and parameter validation") {
    ModelParams p = base_params();
    // d = 1, no canopies: just the reference loss.
    CHECK(pmw(p, 1.0, 0) == doctest::Approx(31.22).epsilon(1e-12));
    // 10 m and two canopies at 1.5 dB each.
    CHECK(pmw(p, 10.0, 2) == doctest::Approx(54.22).epsilon(1e-12));
    // Doubling the distance at exponent 2 adds the frozen slope step.
    CHECK(std::fabs((pmw(p, 20.0, 0) - pmw(p, 10.0, 0)) - 6.020599913279624) < 1e-9);

    CHECK_THROWS_AS(pmw(p, 10.0, -1), Error);
    ModelParams bad = p;
    bad.exponent = 0.0;
    CHECK_THROWS_AS(pmw(bad, 10.0, 0), Error);
    bad = p;
    bad.canopy_loss_db = -0.5;
    CHECK_THROWS_AS(pmw(bad, 10.0, 0), Error);
    CHECK(pmw(p, 0.5, 0) == pmw(p, 1.0, 0));
    CHECK_THROWS_AS(pmw(p, 0.5, 0, ShortRangePolicy::Strict), Error);
}

TEST_CASE("direction-dependent loss uses grid distance and canopy count") {
    ModelParams p = base_params();
    Layout table = table_layout();

    LinkGeometry g{};
    g.d_manhattan_m = 35.6;
    g.d_euclid_m = 25.0;  // deliberately different; must be ignored
    g.n_canopies = 4;
    CHECK(std::fabs(proposed_pl(p, g) - 68.2489999594575) < 1e-9);
    CHECK(std::fabs(proposed_pl(p, g) - 68.25) <= 0.02);
    CHECK(proposed_pl(p, g) == pmw(p, g.d_manhattan_m, g.n_canopies));

    // Same grid distance, three extra canopies: exactly 3 * 1.5 dB more.
    LinkGeometry h = g;
    h.n_canopies = 7;
    CHECK(std::fabs((proposed_pl(p, h) - proposed_pl(p, g)) - 4.5) < 1e-12);

    // Axis-aligned real link: metrics coincide, so the direction-dependent
    // value equals the euclidean evaluation.
    LinkGeometry ax = link_geometry(table, {0.0, 17.8}, {35.6, 17.8});
    CHECK(ax.d_manhattan_m == doctest::Approx(ax.d_euclid_m).epsilon(1e-12));
    CHECK(proposed_pl(p, ax) == doctest::Approx(pmw(p, ax.d_euclid_m, ax.n_canopies)));

    // Canopy loss of zero collapses to the plain one-slope curve at the
    // grid distance, whatever the canopy count.
    ModelParams free = p;
    free.canopy_loss_db = 0.0;
    CHECK(proposed_pl(free, h) == doctest::Approx(pmw(free, h.d_manhattan_m, 0)).epsilon(1e-12));
}

TEST_CASE("direction dependence at equal link length") {
    // Transmitter mid-corridor west of the grid; one receiver through the
    // orchard, one the same distance away from it. Euclidean and grid
    // distances agree on both links, only the canopy counts differ.
    Layout table = table_layout();
    ModelParams p = base_params();
    const Point2D tx{-10.0, 17.8};
    const Point2D rx_through{20.0, 17.8};
    const Point2D rx_away{-40.0, 17.8};

    LinkGeometry gt = link_geometry(table, tx, rx_through);
    LinkGeometry ga = link_geometry(table, tx, rx_away);
    REQUIRE(gt.d_euclid_m == doctest::Approx(ga.d_euclid_m).epsilon(1e-12));
    REQUIRE(gt.d_manhattan_m == doctest::Approx(ga.d_manhattan_m).epsilon(1e-12));
    REQUIRE(gt.n_canopies > 0);
    REQUIRE(ga.n_canopies == 0);

    // Distance-only models cannot tell the two directions apart.
    CHECK(std::fabs(fspl(868.0, gt.d_euclid_m) - fspl(868.0, ga.d_euclid_m)) < 1e-9);
    CHECK(std::fabs(itu_total(868.0, gt.d_euclid_m) - itu_total(868.0, ga.d_euclid_m)) < 1e-9);

    // The canopy-aware model separates them by the full foliage penalty.
    const double diff = proposed_pl(p, gt) - proposed_pl(p, ga);
    CHECK(diff == doctest::Approx(gt.n_canopies * p.canopy_loss_db).epsilon(1e-9));
}

TEST_CASE("blended exponent is the fraction-weighted mean") {
    FfzFractions open_only{1.0, 0.0, 0.0};
    CHECK(flog_exponent(open_only, 2.0, 3.5, 2.8) == doctest::Approx(2.0).epsilon(1e-12));

    FfzFractions mixed{0.6, 0.3, 0.1};
    CHECK(std::fabs(flog_exponent(mixed, 2.0, 3.5, 2.8) - 2.53) < 1e-9);

    // Always inside the convex hull of the intrinsic exponents.
    SplitMix64 rng(99u);
    for (int i = 0; i < 200; ++i) {
        double a = rng.uniform01();
        double b = rng.uniform01() * (1.0 - a);
        double c = 1.0 - a - b;
        FfzFractions fr{a, b, c};
        const double n = flog_exponent(fr, 2.0, 3.5, 2.8);
        CHECK(n >= 2.0 - 1e-12);
        CHECK(n <= 3.5 + 1e-12);
    }

    CHECK_THROWS_AS(flog_exponent({0.5, 0.2, 0.1}, 2.0, 3.5, 2.8), Error);   // sums to 0.8
    CHECK_THROWS_AS(flog_exponent({1.2, -0.1, -0.1}, 2.0, 3.5, 2.8), Error); // out of range
    CHECK_THROWS_AS(flog_exponent({1.0, 0.0, 0.0}, 0.0, 3.5, 2.8), Error);   // bad exponent
}

TEST_CASE("blended log-distance loss values and shadow shift") {
    ModelParams p;
    p.pl0_db = 31.22;
    p.flog_alpha = 2.0;
    p.flog_beta = 3.5;
    p.flog_gamma = 2.8;
    FfzFractions fr{0.6, 0.3, 0.1};

    // At the reference distance the deterministic loss is just pl0.
    CHECK(flog_pl(p, fr, 1.0, 0.0) == doctest::Approx(31.22).epsilon(1e-12));
    CHECK(std::fabs(flog_pl(p, fr, 10.0, 0.0) - 56.52) < 1e-9);
    // The shadow term is a pure additive offset.
    CHECK(std::fabs((flog_pl(p, fr, 10.0, 3.0) - flog_pl(p, fr, 10.0, 0.0)) - 3.0) < 1e-12);

    CHECK(flog_pl(p, fr, 0.5, 0.0) == flog_pl(p, fr, 1.0, 0.0));
    CHECK_THROWS_AS(flog_pl(p, fr, 0.5, 0.0, ShortRangePolicy::Strict), Error);

    ModelParams bad = p;
    bad.d0_m = 2.0;  // only the 1 m reference is supported
    CHECK_THROWS_AS(flog_pl(bad, fr, 10.0, 0.0), Error);
}

TEST_CASE("fresnel-zone occupancy fractions") {
    Layout far_tree(1, 1, 7.12, 7.12, 4.16, Point2D{1000.0, 1000.0});

    SUBCASE("high antennas over bare ground see pure open space") {
        // Max first-zone radius at 868 MHz over 50 m is ~2.08 m, well below
        // the 5 m antenna height, and the single tree is 1 km away.
        FfzFractions fr = ffz_fractions(far_tree, {0.0, 0.0}, 5.0, {50.0, 0.0}, 5.0,
                                        868.0, 4096, 7u);
        CHECK(fr.p_open == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fr.p_foliage == 0.0);
        CHECK(fr.p_ground == 0.0);
    }

    SUBCASE("low antennas clip the ground") {
        FfzFractions fr = ffz_fractions(far_tree, {0.0, 0.0}, 0.1, {50.0, 0.0}, 0.1,
                                        868.0, 8192, 7u);
        CHECK(fr.p_ground > 0.0);
        CHECK(fr.p_open + fr.p_foliage + fr.p_ground == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("a link through a tree row picks up foliage") {
        Layout table = table_layout();
        FfzFractions through = ffz_fractions(table, {-5.0, 0.0}, 1.2, {48.0, 0.0}, 1.2,
                                             868.0, 8192, 11u);
        FfzFractions beside = ffz_fractions(table, {-5.0, -20.0}, 1.2, {48.0, -20.0}, 1.2,
                                            868.0, 8192, 11u);
        CHECK(through.p_foliage > beside.p_foliage);
        CHECK(through.p_foliage > 0.0);
        CHECK(beside.p_foliage == 0.0);
    }

    SUBCASE("fractions sum to one and repeat for a fixed seed") {
        Layout table = table_layout();
        FfzFractions a = ffz_fractions(table, {0.0, 17.8}, 1.2, {35.6, 17.8}, 1.2,
                                       868.0, 4096, 3u);
        FfzFractions b = ffz_fractions(table, {0.0, 17.8}, 1.2, {35.6, 17.8}, 1.2,
                                       868.0, 4096, 3u);
        CHECK(a.p_open == b.p_open);
        CHECK(a.p_foliage == b.p_foliage);
        CHECK(a.p_ground == b.p_ground);
        CHECK(a.p_open + a.p_foliage + a.p_ground == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("degenerate or invalid inputs are rejected") {
        CHECK_THROWS_AS(ffz_fractions(far_tree, {0.0, 0.0}, 1.2, {0.0, 0.0}, 1.2,
                                      868.0, 4096, 7u),
                        Error);
        CHECK_THROWS_AS(ffz_fractions(far_tree, {0.0, 0.0}, 1.2, {50.0, 0.0}, 1.2,
                                      868.0, 0, 7u),
                        Error);
        CHECK_THROWS_AS(ffz_fractions(far_tree, {0.0, 0.0}, -1.0, {50.0, 0.0}, 1.2,
                                      868.0, 4096, 7u),
                        Error);
    }
}

TEST_CASE("received power is the link budget minus path loss") {
    RadioConfig radio;  // 868 MHz, 21 dBm
    CHECK(predict_rssi(68.25, radio) == doctest::Approx(-47.25).epsilon(1e-12));
    CHECK(predict_rssi(0.0, radio) == doctest::Approx(radio.tx_power_dbm).epsilon(1e-12));
    CHECK(predict_rssi(70.0, radio) < predict_rssi(60.0, radio));
    CHECK_THROWS_AS(predict_rssi(std::nan(""), radio), Error);
}

TEST_CASE("all path-loss curves increase monotonically with distance") {
    ModelParams p = base_params();
    FfzFractions fr{0.6, 0.3, 0.1};
    ModelParams pf = p;
    pf.flog_alpha = 2.0;
    pf.flog_beta = 3.5;
    pf.flog_gamma = 2.8;
    std::vector<double> walls{3.0, 3.0};

    double d = 1.0;
    double prev_fspl = fspl(868.0, d);
    double prev_itu = itu_total(868.0, d);
    double prev_mw = multiwall(p, d, walls);
    double prev_pmw = pmw(p, d, 2);
    double prev_flog = flog_pl(pf, fr, d, 0.0);
    while (d < 10000.0) {
        d *= 1.37;
        const double cd = std::min(d, 10000.0);
        CHECK(fspl(868.0, cd) > prev_fspl);
        CHECK(itu_total(868.0, cd) > prev_itu);
        CHECK(multiwall(p, cd, walls) > prev_mw);
        CHECK(pmw(p, cd, 2) > prev_pmw);
        CHECK(flog_pl(pf, fr, cd, 0.0) > prev_flog);
        prev_fspl = fspl(868.0, cd);
        prev_itu = itu_total(868.0, cd);
        prev_mw = multiwall(p, cd, walls);
        prev_pmw = pmw(p, cd, 2);
        prev_flog = flog_pl(pf, fr, cd, 0.0);
    }
}

TEST_CASE("model dispatch matches the standalone functions") {
    Layout table = table_layout();
    ModelParams p = base_params();
    p.wall_losses_db = {3.0, 3.0};
    RadioConfig radio;
    const Point2D tx{0.0, 17.8};
    const Point2D rx{35.6, 17.8};
    LinkGeometry g = link_geometry(table, tx, rx);

    CHECK(eval_model_pl(ModelId::Fspl, p, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(fspl(868.0, g.d_euclid_m)).epsilon(1e-12));
    CHECK(eval_model_pl(ModelId::Itu, p, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(itu_total(868.0, g.d_euclid_m)).epsilon(1e-12));
    CHECK(eval_model_pl(ModelId::Multiwall, p, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(multiwall(p, g.d_euclid_m, p.wall_losses_db)).epsilon(1e-12));
    CHECK(eval_model_pl(ModelId::Pmw, p, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(pmw(p, g.d_euclid_m, g.n_canopies)).epsilon(1e-12));
    CHECK(eval_model_pl(ModelId::Proposed, p, radio, table, tx, rx, Metric::Manhattan,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(proposed_pl(p, g)).epsilon(1e-12));

    // The dispatcher honors the metric argument: the direction-dependent
    // model evaluated with the euclidean metric equals pmw at that distance.
    CHECK(eval_model_pl(ModelId::Proposed, p, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, 0) ==
          doctest::Approx(pmw(p, g.d_euclid_m, g.n_canopies)).epsilon(1e-12));

    // Blended model: dispatch equals composing the pieces with the same key.
    FlogOptions fo;
    ModelParams pf = p;
    pf.flog_alpha = 2.0;
    pf.flog_beta = 3.5;
    pf.flog_gamma = 2.8;
    const std::uint64_t key = 1234u;
    FfzFractions fr = ffz_fractions(table, tx, fo.tx_height_m, rx, fo.rx_height_m,
                                    radio.freq_mhz, fo.ffz_samples, key,
                                    fo.canopy_center_height_m);
    CHECK(eval_model_pl(ModelId::Flog, pf, radio, table, tx, rx, Metric::Euclid,
                        ShortRangePolicy::Clamp, key, fo) ==
          doctest::Approx(flog_pl(pf, fr, g.d_euclid_m, 0.0)).epsilon(1e-12));
}

TEST_CASE("default metrics per model") {
    CHECK(default_metric(ModelId::Fspl) == Metric::Euclid);
    CHECK(default_metric(ModelId::Itu) == Metric::Euclid);
    CHECK(default_metric(ModelId::Multiwall) == Metric::Euclid);
    CHECK(default_metric(ModelId::Pmw) == Metric::Euclid);
    CHECK(default_metric(ModelId::Flog) == Metric::Euclid);
    CHECK(default_metric(ModelId::Proposed) == Metric::Manhattan);
}
