#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "orpd/front_io.hpp"

using namespace orpd;

namespace {

FrontPoints parse_text(const std::string& s) {
    std::istringstream in(s);
    return parse_front_csv(in, "t.csv");
}

ControlVector parse_ctl(const std::string& s, const NetworkCase& c) {
    std::istringstream in(s);
    return parse_control_file(in, c, "t.ctl");
}

} // namespace

TEST_SUITE("front_io") {

TEST_CASE("numbers round-trip in shortest form") {
    CHECK(format_number(0.95) == "0.95");
    CHECK(format_number(17.0) == "17");
    CHECK(format_number(1e6) == "1e+06");
    CHECK(format_number(-0.5) == "-0.5");
    const double x = 16.383985669258944;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("front csv layout") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    CHECK(front_header(c) ==
          "ploss_mw,vd,violation,vg_1,vg_2,vg_3,vg_4,vg_5,vg_6,tap_1,tap_2,tap_3,tap_4,shunt_1,shunt_2,shunt_3");
    Individual ind;
    ind.u = current_controls(c);
    ind.objectives = {17.5, 6.4};
    ind.violation = 0.25;
    CHECK(front_row(c, ind) == "17.5,6.4,0.25,1.06,1.043,1.01,1.01,1.082,1.071,0.98,0.97,0.93,0.97,5,19,4");
    auto other = ind;
    other.objectives = {17.0, 6.0};
    CHECK_NOTHROW(front_csv(c, {ind, other})); // equal violation, neither dominates
    ind.violation = other.violation = 0.0;
    CHECK_THROWS_AS(front_csv(c, {ind, other}), std::logic_error);
    other.objectives = {18.0, 5.0};
    const auto csv = front_csv(c, {ind, other});
    std::istringstream in(csv);
    const auto back = parse_front_csv(in);
    CHECK(back == FrontPoints{{17.5, 6.4}, {18.0, 5.0}});
}

TEST_CASE("reference csv round-trips") {
    const FrontPoints pts{{16.383985669258944, 8.18442675638092}, {18.5, 1.29}};
    std::istringstream in(reference_csv(pts));
    CHECK(parse_front_csv(in) == pts);
}

TEST_CASE("front csv reader errors") {
    CHECK_THROWS_WITH_AS(parse_text(""), doctest::Contains("file is empty"), InputFileError);
    CHECK_THROWS_WITH_AS(parse_text("ploss_mw,vd\n"), doctest::Contains("no data rows"), InputFileError);
    CHECK_THROWS_AS(parse_text("loss,vd\n1,2\n"), InputFileError);
    try {
        parse_text("ploss_mw,vd\n1,2\n3,x\n");
        FAIL("expected InputFileError");
    } catch (const InputFileError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_text("ploss_mw,vd\n1,inf\n"), InputFileError);
    CHECK(parse_text("ploss_mw,vd,extra\n1,2,3\n\n") == FrontPoints{{1, 2}});
    CHECK_THROWS_AS(read_front_csv("/nonexistent/front.csv"), InputFileError);
    CHECK(read_front_csv(fixtures::test_data_path("front_small.csv")).size() == 3);
}

TEST_CASE("control files") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    CHECK(read_control_file(fixtures::data_path("ieee30_initial.ctl"), c) == current_controls(c));
    const auto u = parse_ctl("# comment\nvg 1 1 1 1 1 1\n\ntap 1 1 1 1 # trailing\nshunt 0 0 0\n", c);
    CHECK(u.tap_steps == std::vector<int>{10, 10, 10, 10});
    CHECK_THROWS_WITH_AS(parse_ctl("vg 1 1 1 1 1 1\nvg 1 1 1 1 1 1\n", c), doctest::Contains("duplicate"),
                         InputFileError);
    CHECK_THROWS_WITH_AS(parse_ctl("qg 1\n", c), doctest::Contains("unknown key"), InputFileError);
    CHECK_THROWS_WITH_AS(parse_ctl("vg 1 1 1 1 1 x\n", c), doctest::Contains("bad number"), InputFileError);
    CHECK_THROWS_AS(parse_ctl("# nothing\n", c), InputFileError);
    CHECK_THROWS_WITH_AS(read_control_file(fixtures::test_data_path("short.ctl"), c),
                         doctest::Contains("vg needs 6 values"), InputFileError);
    CHECK_THROWS_AS(parse_ctl("vg 1 1 1 1 1 1.3\ntap 1 1 1 1\nshunt 0 0 0\n", c), InputFileError);
    CHECK_THROWS_AS(parse_ctl("vg 1 1 1 1 1 1\ntap 1 1 1 1.005\nshunt 0 0 0\n", c), InputFileError);
}

TEST_CASE("inline control list") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    CHECK(parse_control_list("1.06,1.043,1.01,1.01,1.082,1.071,0.98,0.97,0.93,0.97,5,19,4", c) ==
          current_controls(c));
    CHECK(parse_control_list("1.06 1.043 1.01 1.01 1.082 1.071 0.98 0.97 0.93 0.97 5 19 4", c) ==
          current_controls(c));
    CHECK_THROWS_WITH_AS(parse_control_list("1,2,3", c), doctest::Contains("expected 13 values"), InputFileError);
    CHECK_THROWS_AS(parse_control_list("1.06,1.043,1.01,1.01,1.082,1.071,0.98,0.97,0.93,0.97,5,19,q", c),
                    InputFileError);
}

TEST_CASE("decision and bcs tables") {
    const auto c = load_case(fixtures::data_path("ieee30.case"));
    Population front;
    const double pts[][2] = {{16.4, 3.0}, {16.5, 2.8}, {16.6, 2.7}, {17.3, 1.7}, {17.5, 1.6}, {17.8, 1.5}};
    for (const auto& p : pts) {
        Individual i;
        i.u = current_controls(c);
        i.objectives = {p[0], p[1]};
        front.push_back(i);
    }
    std::vector<ObjectivePair> objs;
    for (const auto& m : front) objs.push_back(m.objectives);
    const auto rep = analyze(objs, {});
    const auto bcs = bcs_csv(c, front, rep);
    CHECK(bcs.rfind(front_header(c) + ",cluster,priority\n", 0) == 0);
    CHECK(std::count(bcs.begin(), bcs.end(), '\n') == 3);
    const auto dec = decision_csv(front, rep);
    CHECK(dec.rfind("index,ploss_mw,vd,norm_ploss,norm_vd,cluster,membership_1,membership_2,", 0) == 0);
    CHECK(std::count(dec.begin(), dec.end(), '\n') == 7);
}

}
