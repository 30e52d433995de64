#pragma once

#include <sstream>
#include <string>

#include "orpd/network.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(ORPD_DATA_DIR) + "/" + name; }
inline std::string test_data_path(const std::string& name) { return std::string(ORPD_TEST_DATA_DIR) + "/" + name; }

// Three buses, one tapped line and one switched shunt.
inline const char* three_bus_text = R"(
[base_mva]
100

[bus]
1 3 0 0 0 0 1 1 0 132 1 1.1 0.9
2 2 20 10 0 0 1 1 0 132 1 1.1 0.9
3 1 60 25 0 0 1 1 0 132 1 1.05 0.95

[generator]
1 0 0 100 -50 1.05 100 1 200 0 1.1 0.9
2 40 0 50 -30 1.02 100 1 100 0 1.1 0.9

[branch]
1 2 0.02 0.06 0.03 100 0 0 0 0 1
1 3 0.08 0.24 0.025 100 0 0 0 0 1
2 3 0.06 0.18 0.02 100 0 0 0.98 0 1

[transformer]
3 0.9 1.1 0.01

[shunt]
3 10 2 3
)";

inline orpd::NetworkCase parse(const std::string& text) {
    std::istringstream in(text);
    return orpd::parse_case(in, "test");
}

inline orpd::NetworkCase three_bus() { return parse(three_bus_text); }

} // namespace fixtures
