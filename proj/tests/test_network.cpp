#include <random>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "orpd/network.hpp"

using namespace orpd;

namespace {

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

ControlVector random_controls(const NetworkCase& c, std::mt19937_64& rng) {
    const auto b = control_bounds(c);
    ControlVector u;
    for (std::size_t i = 0; i < b.v_lower.size(); ++i)
        u.gen_v.push_back(std::uniform_real_distribution<double>(b.v_lower[i], b.v_upper[i])(rng));
    for (int m : b.tap_max) u.tap_steps.push_back(std::uniform_int_distribution<int>(0, m)(rng));
    for (int m : b.shunt_max) u.shunt_banks.push_back(std::uniform_int_distribution<int>(0, m)(rng));
    return u;
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("three-bus case parses with linked tap changer") {
    const auto c = fixtures::three_bus();
    CHECK(c.buses().size() == 3);
    CHECK(c.branches().size() == 3);
    CHECK(c.generators().size() == 2);
    CHECK(c.flow_limits());
    CHECK(c.buses()[c.slack_index()].id == 1);
    REQUIRE(c.branches()[2].tap_index.has_value());
    CHECK(*c.branches()[2].tap_index == 0);
    CHECK_FALSE(c.branches()[0].tap_index.has_value());
    CHECK(c.branches()[2].tap_ratio == doctest::Approx(0.98));
    CHECK(c.branches()[0].tap_ratio == 1.0);
    CHECK(c.shunts()[0].banks_in_service == 3);
}

TEST_CASE("bundled 30-bus case has the expected layout") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    CHECK(c.buses().size() == 30);
    CHECK(c.branches().size() == 41);
    CHECK(c.generators().size() == 6);
    CHECK(c.transformers().size() == 4);
    CHECK(c.shunts().size() == 3);
    CHECK(control_bounds(c).dimension() == 13);
    const auto b = control_bounds(c);
    for (int m : b.tap_max) CHECK(m == 20);
    for (int m : b.shunt_max) CHECK(m == 20);
    for (std::size_t i = 0; i < b.v_lower.size(); ++i) {
        CHECK(b.v_lower[i] == doctest::Approx(0.9));
        CHECK(b.v_upper[i] == doctest::Approx(1.1));
    }
    int load = 0;
    for (const auto& bus : c.buses()) load += bus.kind == BusKind::load;
    CHECK(load == 24);
}

TEST_CASE("bundled 118-bus case has 78 control variables") {
    const auto c = load_case(fixtures::data_path("ieee118.case"));
    CHECK(c.buses().size() == 118);
    CHECK(c.generators().size() == 54);
    CHECK(c.branches().size() == 186);
    CHECK(c.transformers().size() == 9);
    CHECK(c.shunts().size() == 15);
    CHECK(control_bounds(c).dimension() == 78);
}

TEST_CASE("initial operating point equals the stored case settings") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    const auto u = controls_from_physical(c, {1.06, 1.043, 1.01, 1.01, 1.082, 1.071}, {0.98, 0.97, 0.93, 0.97},
                                          {5, 19, 4});
    CHECK(u == current_controls(c));
    CHECK(u.tap_steps == std::vector<int>{8, 7, 3, 7});
}

TEST_CASE("parse errors carry the offending line") {
    const std::string good = fixtures::three_bus_text;
    SUBCASE("bad number") {
        const auto text = replace(good, "0.02 0.06", "0.02 zz");
        try {
            fixtures::parse(text);
            FAIL("expected CaseParseError");
        } catch (const CaseParseError& e) {
            CHECK(e.line() == 15);
            CHECK(std::string(e.what()).find("zz") != std::string::npos);
        }
    }
    SUBCASE("unknown section") {
        CHECK_THROWS_AS(fixtures::parse(replace(good, "[shunt]", "[capacitor]")), CaseParseError);
    }
    SUBCASE("missing section") {
        CHECK_THROWS_AS(fixtures::parse("[base_mva]\n100\n[bus]\n1 3 0 0 0 0 1 1 0 1 1 1.1 0.9\n"), CaseParseError);
    }
    SUBCASE("short row") {
        CHECK_THROWS_AS(fixtures::parse(replace(good, "1 2 0.02 0.06 0.03 100 0 0 0 0 1", "1 2 0.02")), CaseParseError);
    }
    SUBCASE("bad bus type") {
        CHECK_THROWS_AS(fixtures::parse(replace(good, "3 1 60", "3 7 60")), CaseParseError);
    }
    SUBCASE("data before a section") {
        CHECK_THROWS_AS(fixtures::parse("42\n" + good), CaseParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_case("/nonexistent/file.case"), CaseParseError); }
}

TEST_CASE("validation rejects inconsistent cases") {
    const std::string good = fixtures::three_bus_text;
    CHECK_THROWS_AS(fixtures::parse(replace(good, "2 2 20 10", "2 3 20 10")), CaseValidationError);
    CHECK_THROWS_AS(fixtures::parse(replace(good, "2 2 20 10", "1 2 20 10")), CaseValidationError);
    CHECK_THROWS_AS(fixtures::parse(replace(good, "2 40 0 50", "3 40 0 50")), CaseValidationError);
    CHECK_THROWS_AS(fixtures::parse(replace(good, "3 0.9 1.1 0.01", "3 0.9 1.1 0.03")), CaseValidationError);
    CHECK_THROWS_AS(fixtures::parse(replace(good, "3 10 2 3", "3 10 2 11")), CaseValidationError);
    CHECK_THROWS_AS(fixtures::parse(replace(good, "0.02 0.06 0.03", "0.02 0 0.03")), CaseValidationError);
    // removing both lines into bus 3 disconnects it
    auto cut = replace(good, "1 3 0.08 0.24 0.025 100 0 0 0 0 1", "1 3 0.08 0.24 0.025 100 0 0 0 0 0");
    cut = replace(cut, "2 3 0.06 0.18 0.02 100 0 0 0.98 0 1", "2 3 0.06 0.18 0.02 100 0 0 0.98 0 0");
    CHECK_THROWS_AS(fixtures::parse(cut), CaseValidationError);
    // a PV bus whose only generator is out of service
    CHECK_THROWS_AS(fixtures::parse(replace(good, "2 40 0 50 -30 1.02 100 1", "2 40 0 50 -30 1.02 100 0")),
                    CaseValidationError);
}

TEST_CASE("apply_controls round-trips and preserves bounds") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_controls(c, rng);
        const auto d = apply_controls(c, u);
        CHECK(current_controls(d) == u);
        CHECK(control_bounds(d) == control_bounds(c));
        const auto ratios = tap_ratios(c, u);
        for (std::size_t i = 0; i < ratios.size(); ++i)
            CHECK(d.branches()[c.transformers()[i].branch].tap_ratio == ratios[i]);
    }
}

TEST_CASE("out-of-range controls are rejected with their index") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    auto u = current_controls(c);
    SUBCASE("setpoint") {
        u.gen_v[2] = 1.2;
        try {
            apply_controls(c, u);
            FAIL("expected ControlError");
        } catch (const ControlError& e) {
            CHECK(e.index() == 2);
        }
    }
    SUBCASE("tap") {
        u.tap_steps[1] = 21;
        try {
            apply_controls(c, u);
            FAIL("expected ControlError");
        } catch (const ControlError& e) {
            CHECK(e.index() == 7);
        }
    }
    SUBCASE("shunt") {
        u.shunt_banks[2] = -1;
        try {
            apply_controls(c, u);
            FAIL("expected ControlError");
        } catch (const ControlError& e) {
            CHECK(e.index() == 12);
        }
    }
    SUBCASE("length") {
        u.gen_v.pop_back();
        CHECK_THROWS_AS(apply_controls(c, u), ControlError);
    }
}

TEST_CASE("physical conversion rejects off-grid values") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    const std::vector<double> vg{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(controls_from_physical(c, vg, {0.985, 1, 1, 1}, {0, 0, 0}), ControlError);
    CHECK_THROWS_AS(controls_from_physical(c, vg, {1, 1, 1, 1}, {0.5, 0, 0}), ControlError);
    CHECK_THROWS_AS(controls_from_physical(c, vg, {1, 1, 1}, {0, 0, 0}), ControlError);
    const auto u = controls_from_physical(c, vg, {0.9, 1.0, 1.1, 0.95}, {0, 10, 20});
    CHECK(u.tap_steps == std::vector<int>{0, 10, 20, 5});
    CHECK(tap_ratios(c, u) == std::vector<double>{0.9, 1.0, 1.1, 0.95});
    CHECK(shunt_mvar(c, u) == std::vector<double>{0, 10, 20});
}

TEST_CASE("tap positions map to exact multiples of the step") {
    Transformer t;
    t.t_min = 0.9;
    t.t_max = 1.1;
    t.step = 0.01;
    CHECK(t.max_position() == 20);
    for (int k = 0; k <= 20; ++k) CHECK(t.ratio_at(k) == doctest::Approx(0.9 + 0.01 * k).epsilon(1e-12));
    CHECK(t.ratio_at(5) == 0.95);
}

}
