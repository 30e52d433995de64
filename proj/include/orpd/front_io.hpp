#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "orpd/decision.hpp"
#include "orpd/metrics.hpp"
#include "orpd/moea.hpp"

namespace orpd {

/// Bad front/reference CSV or control file. line() is 1-based, 0 if unknown.
class InputFileError : public std::runtime_error {
public:
    InputFileError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// ploss_mw,vd,violation,vg_1..,tap_1..,shunt_1.. (taps as ratios, shunts in Mvar).
std::string front_header(const NetworkCase& c);
std::string front_row(const NetworkCase& c, const Individual& ind);

/// Throws std::logic_error if two rows dominate one another.
std::string front_csv(const NetworkCase& c, const Population& members);

/// Front row columns followed by cluster and priority.
std::string bcs_csv(const NetworkCase& c, const Population& front, const BcsReport& rep);

/// One row per front member with memberships and GRP quantities.
std::string decision_csv(const Population& front, const BcsReport& rep);

std::string reference_csv(const FrontPoints& pts);

/// Reads the ploss_mw and vd columns of a front or reference CSV.
FrontPoints parse_front_csv(std::istream& in, const std::string& source = "<stream>");
FrontPoints read_front_csv(const std::string& path);

/// Control file: lines "vg ...", "tap ..." (ratios), "shunt ..." (Mvar); '#' starts a comment.
ControlVector parse_control_file(std::istream& in, const NetworkCase& c, const std::string& source = "<stream>");
ControlVector read_control_file(const std::string& path, const NetworkCase& c);

/// All physical values in front-CSV order, separated by commas or spaces.
ControlVector parse_control_list(const std::string& text, const NetworkCase& c);

} // namespace orpd
