#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "xroute/errors.hpp"
#include "xroute/experiments.hpp"
#include "xroute/rng.hpp"

using namespace xroute;
using namespace xroute::testing;

namespace {

/// Grid-search oracle for two pools at the given granularity.
double best_split_two_pools(const Pool& p1, const Pool& p2, double total, double step) {
    double best = 0.0;
    for (double d = 0.0; d <= total + 1e-9; d += step) {
        const double a = std::min(d, total);
        best = std::max(best, swap_out(p1, a) + swap_out(p2, total - a));
    }
    return best;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("make_validator_set hits the requested coefficient") {
    for (int nc = 1; nc <= 10; ++nc)
        CHECK(nakamoto_coefficient(make_validator_set("x", nc)) == nc);
}

TEST_CASE("direct connectivity of a line") {
    const Topology t = make_line_topology(3);
    const auto res = connectivity(t, ConnectivityMode::Direct, 1, 1);
    CHECK(res.connected_fraction == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("multihop connectivity of a line with a compliant middle") {
    const Topology t = make_line_topology(3, /*target_nc=*/8);
    const auto res = connectivity(t, ConnectivityMode::Multihop, 8, 2);
    CHECK(res.connected_fraction == doctest::Approx(1.0));
    // raising the bar past the middle chain cuts the end-to-end pairs
    const auto strict = connectivity(t, ConnectivityMode::Multihop, 9, 2);
    CHECK(strict.connected_fraction == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("hub connectivity of a star") {
    const Topology good = make_star_topology(4, /*hub_nc=*/8, /*leaf_nc=*/2);
    CHECK(connectivity(good, ConnectivityMode::Hub, 8, 2, "hub").connected_fraction ==
          doctest::Approx(1.0));
    CHECK(connectivity(good, ConnectivityMode::Hub, 9, 2, "hub").connected_fraction ==
          doctest::Approx(0.0));
}

TEST_CASE("decentralization curve starts at plain connectivity and collapses a star") {
    const Topology star = make_star_topology(4, 8, 2);
    const auto curve = decentralization_curve(star, 2, 1, false, 0, 1);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].second ==
          doctest::Approx(connectivity(star, ConnectivityMode::Multihop, 1, 2).connected_fraction));
    CHECK(curve[1].second == doctest::Approx(0.0));  // hub removed, leaves isolated
}

TEST_CASE("multihop connectivity is monotone in threshold and hop budget") {
    const Topology t = make_scale_free_topology(30, 2, 11);
    double prev = 2.0;
    for (int thr = 1; thr <= 9; ++thr) {
        const double frac =
            connectivity(t, ConnectivityMode::Multihop, thr, 3).connected_fraction;
        CHECK(frac <= prev + 1e-12);
        prev = frac;
    }
    for (int hops = 1; hops <= 4; ++hops) {
        const double narrow =
            connectivity(t, ConnectivityMode::Multihop, 4, hops).connected_fraction;
        const double wide =
            connectivity(t, ConnectivityMode::Multihop, 4, hops + 1).connected_fraction;
        CHECK(wide >= narrow - 1e-12);
    }
}

TEST_CASE("decentralization curve is non-increasing on scale-free topologies") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const Topology t = make_scale_free_topology(24, 2, seed);
        const auto curve = decentralization_curve(t, 3, 4, false, seed, 4);
        for (std::size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].second <= curve[i - 1].second + 1e-12);
    }
}

TEST_CASE("cost model carries the exact policy term") {
    const CostBreakdown c = cost_model(3, 54);
    CHECK(c.policy_gas == 2'504'358);
    CHECK(c.delivery_gas == 3 * 150'000);
    CHECK(c.setup_gas == doctest::Approx(0.0));

    const CostBreakdown zero = cost_model(3, 0);
    CHECK(zero.policy_gas == 0);
}

TEST_CASE("setup amortization is exactly linear") {
    const CostBreakdown full = cost_model(2, 4, 1, true);
    const CostBreakdown tenth = cost_model(2, 4, 10, true);
    CHECK(tenth.setup_gas == doctest::Approx(full.setup_gas / 10.0));
}

TEST_CASE("cost model is linear in each argument") {
    auto gas = [](int hops, int validators) { return cost_model(hops, validators).total_gas; };
    // finite differences stay constant under a linear model
    const double dh1 = gas(2, 10) - gas(1, 10);
    const double dh2 = gas(3, 10) - gas(2, 10);
    CHECK(dh1 == doctest::Approx(dh2));
    const double dv1 = gas(3, 11) - gas(3, 10);
    const double dv2 = gas(3, 12) - gas(3, 11);
    CHECK(dv1 == doctest::Approx(dv2));
}

TEST_CASE("swap_out follows the constant-product curve") {
    const Pool p = make_pool("X", 1000.0, 1000.0);
    CHECK(swap_out(p, 100.0) == doctest::Approx(1000.0 * 100.0 / 1100.0));
    CHECK(swap_out(p, 0.0) == doctest::Approx(0.0));
    CHECK(swap_out(p, 1e12) < 1000.0);  // output never exceeds the reserve

    const Pool after = apply_swap(p, 100.0);
    CHECK(after.reserve_x * after.reserve_y == doctest::Approx(p.k).epsilon(1e-9));
}

TEST_CASE("splitting across equal pools beats a single pool") {
    const Pool p1 = make_pool("X", 1000.0, 1000.0);
    const Pool p2 = make_pool("Y", 1000.0, 1000.0);
    const auto alloc = split_trade({p1, p2}, 100.0);
    CHECK(alloc[0] == doctest::Approx(50.0));
    CHECK(alloc[1] == doctest::Approx(50.0));
    const double out = split_output({p1, p2}, alloc);
    CHECK(out == doctest::Approx(2.0 * 1000.0 * 50.0 / 1050.0));
    CHECK(out > swap_out(p1, 100.0));
}

TEST_CASE("single pool takes the whole trade") {
    const auto alloc = split_trade({make_pool("X", 10.0, 20.0)}, 5.0);
    CHECK(alloc == std::vector<double>{5.0});
}

TEST_CASE("a small trade mostly goes to the deep pool") {
    const Pool big = make_pool("X", 1000.0, 1000.0);
    const Pool tiny = make_pool("Y", 10.0, 10.0);
    const auto alloc = split_trade({big, tiny}, 10.0);
    CHECK(alloc[0] > 9.0);
    CHECK(alloc[0] + alloc[1] == doctest::Approx(10.0));
    // oracle comparison
    const double oracle = best_split_two_pools(big, tiny, 10.0, 0.01);
    CHECK(split_output({big, tiny}, alloc) >= oracle - 0.01);
}

TEST_CASE("split_trade matches a grid oracle within a tenth of a percent") {
    Rng rng(17);
    for (int iter = 0; iter < 12; ++iter) {
        const Pool p1 = make_pool("A", 100.0 + static_cast<double>(rng.bounded(5000)),
                                  100.0 + static_cast<double>(rng.bounded(5000)));
        const Pool p2 = make_pool("B", 100.0 + static_cast<double>(rng.bounded(5000)),
                                  100.0 + static_cast<double>(rng.bounded(5000)));
        const double total = 50.0 + static_cast<double>(rng.bounded(2000));
        const double mine = split_output({p1, p2}, split_trade({p1, p2}, total));
        const double oracle = best_split_two_pools(p1, p2, total, total / 1000.0);
        CHECK(mine >= oracle * (1.0 - 1e-3));
    }
}

TEST_CASE("local saturation returns one third of face value at twice the reserve") {
    const double x = 5000.0;
    const Pool local = make_pool("c000", x, x);
    const double out = swap_out(local, 2.0 * x);
    CHECK(out == doctest::Approx(2.0 * x / 3.0).epsilon(1e-12));
    CHECK(out / (2.0 * x) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stableswap curve ordering across hop limits") {
    const SwapFixture fx = make_swap_fixture(5, 1e7);
    const std::vector<double> trades{1e5, 1e6, 5e6};
    const auto rows = stableswap_curve(fx.topology, fx.pools, fx.local, {0, 1, 3, -1}, trades);
    auto output_at = [&](int hop, double trade) {
        for (const auto& r : rows)
            if (r.hop_limit == hop && r.trade_size == trade) return r.output;
        FAIL("row missing");
        return 0.0;
    };
    for (double trade : trades) {
        CHECK(output_at(0, trade) <= output_at(1, trade) + 1e-9);
        CHECK(output_at(1, trade) <= output_at(3, trade) + 1e-9);
        CHECK(output_at(3, trade) <= output_at(-1, trade) + 1e-9);
    }
}

TEST_CASE("scalability fixture shape") {
    const ScalabilityFixture fx = make_scalability_fixture(8, 4, 100, 1000);
    CHECK(fx.topology.chains().size() == 13);
    CHECK(fx.paths.size() == 8);
    for (const auto& [s, d] : fx.paths) {
        CHECK(s != d);
        CHECK(fx.topology.connected(s, fx.hub));
        CHECK(fx.topology.connected(d, fx.hub));
    }
    // every endpoint pair has one route per relay chain plus the hub
    CHECK(fx.topology.degree("relay000") == 8);
}

}  // TEST_SUITE
