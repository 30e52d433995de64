#include "orpd/front_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace orpd {

InputFileError::InputFileError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

void append_list(std::string& out, const std::vector<double>& vs) {
    for (double v : vs) {
        out += ',';
        out += format_number(v);
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto r = std::from_chars(first, t.data() + t.size(), out);
    return r.ec == std::errc() && r.ptr == t.data() + t.size();
}

} // namespace

std::string front_header(const NetworkCase& c) {
    std::string h = "ploss_mw,vd,violation";
    for (std::size_t i = 1; i <= c.generators().size(); ++i) h += ",vg_" + std::to_string(i);
    for (std::size_t i = 1; i <= c.transformers().size(); ++i) h += ",tap_" + std::to_string(i);
    for (std::size_t i = 1; i <= c.shunts().size(); ++i) h += ",shunt_" + std::to_string(i);
    return h;
}

std::string front_row(const NetworkCase& c, const Individual& ind) {
    std::string r = format_number(ind.objectives.p_loss) + ',' + format_number(ind.objectives.vd) + ',' +
                    format_number(ind.violation);
    append_list(r, ind.u.gen_v);
    append_list(r, tap_ratios(c, ind.u));
    append_list(r, shunt_mvar(c, ind.u));
    return r;
}

std::string front_csv(const NetworkCase& c, const Population& members) {
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < members.size(); ++j)
            if (i != j && dominates(members[i], members[j]))
                throw std::logic_error("front rows " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                       " are not mutually non-dominated");
    std::string out = front_header(c) + '\n';
    for (const auto& m : members) out += front_row(c, m) + '\n';
    return out;
}

std::string bcs_csv(const NetworkCase& c, const Population& front, const BcsReport& rep) {
    std::string out = front_header(c) + ",cluster,priority\n";
    for (std::size_t k = 0; k < rep.bcs.size(); ++k) {
        const auto i = rep.bcs[k];
        out += front_row(c, front[i]) + ',' + std::to_string(rep.bcs_cluster[k] + 1) + ',' +
               format_number(rep.cluster_priority[static_cast<Eigen::Index>(i)]) + '\n';
    }
    return out;
}

std::string decision_csv(const Population& front, const BcsReport& rep) {
    const auto nc = rep.clustering.membership.cols();
    std::string out = "index,ploss_mw,vd,norm_ploss,norm_vd,cluster";
    for (Eigen::Index q = 1; q <= nc; ++q) out += ",membership_" + std::to_string(q);
    out += ",gr_plus_ploss,gr_plus_vd,gr_minus_ploss,gr_minus_vd,pr_plus,pr_minus,priority,cluster_priority,bcs\n";
    for (std::size_t i = 0; i < front.size(); ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        std::string r = std::to_string(i + 1) + ',' + format_number(front[i].objectives.p_loss) + ',' +
                        format_number(front[i].objectives.vd) + ',' + format_number(rep.normalized(e, 0)) + ',' +
                        format_number(rep.normalized(e, 1)) + ',' + std::to_string(rep.cluster[i] + 1);
        for (Eigen::Index q = 0; q < nc; ++q) r += ',' + format_number(rep.clustering.membership(e, q));
        for (const auto* m : {&rep.whole.gr_plus, &rep.whole.gr_minus})
            for (Eigen::Index k = 0; k < 2; ++k) r += ',' + format_number((*m)(e, k));
        r += ',' + format_number(rep.whole.pr_plus[e]) + ',' + format_number(rep.whole.pr_minus[e]) + ',' +
             format_number(rep.whole.priority[e]) + ',' + format_number(rep.cluster_priority[e]);
        const bool is_bcs = std::find(rep.bcs.begin(), rep.bcs.end(), i) != rep.bcs.end();
        out += r + ',' + (is_bcs ? "1" : "0") + '\n';
    }
    return out;
}

std::string reference_csv(const FrontPoints& pts) {
    std::string out = "ploss_mw,vd\n";
    for (const auto& p : pts) out += format_number(p.p_loss) + ',' + format_number(p.vd) + '\n';
    return out;
}

FrontPoints parse_front_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    FrontPoints pts;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        if (!header) {
            if (fields.size() < 2 || trim(fields[0]) != "ploss_mw" || trim(fields[1]) != "vd")
                throw InputFileError(source, lineno, "expected header starting with ploss_mw,vd");
            header = true;
            continue;
        }
        ObjectivePair p;
        if (fields.size() < 2 || !parse_double(fields[0], p.p_loss) || !parse_double(fields[1], p.vd))
            throw InputFileError(source, lineno, "expected two numeric columns");
        if (!std::isfinite(p.p_loss) || !std::isfinite(p.vd)) throw InputFileError(source, lineno, "non-finite value");
        pts.push_back(p);
    }
    if (!header) throw InputFileError(source, 0, "file is empty");
    if (pts.empty()) throw InputFileError(source, 0, "no data rows");
    return pts;
}

FrontPoints read_front_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputFileError(path, 0, "cannot open file");
    return parse_front_csv(in, path);
}

ControlVector parse_control_file(std::istream& in, const NetworkCase& c, const std::string& source) {
    std::vector<double> vg, tap, shunt;
    bool seen[3] = {false, false, false};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        int slot = key == "vg" ? 0 : key == "tap" ? 1 : key == "shunt" ? 2 : -1;
        if (slot < 0) throw InputFileError(source, lineno, "unknown key '" + key + "' (expected vg, tap or shunt)");
        if (seen[slot]) throw InputFileError(source, lineno, "duplicate key '" + key + "'");
        seen[slot] = true;
        auto& dst = slot == 0 ? vg : slot == 1 ? tap : shunt;
        std::string tok;
        while (ss >> tok) {
            double v;
            if (!parse_double(tok, v)) throw InputFileError(source, lineno, "bad number '" + tok + "'");
            dst.push_back(v);
        }
    }
    if (!seen[0] && !seen[1] && !seen[2]) throw InputFileError(source, 0, "no control values");
    const std::size_t want[3] = {c.generators().size(), c.transformers().size(), c.shunts().size()};
    const char* names[3] = {"vg", "tap", "shunt"};
    const std::vector<double>* got[3] = {&vg, &tap, &shunt};
    for (int k = 0; k < 3; ++k)
        if (got[k]->size() != want[k])
            throw InputFileError(source, 0,
                                 std::string(names[k]) + " needs " + std::to_string(want[k]) + " values, got " +
                                     std::to_string(got[k]->size()));
    try {
        return controls_from_physical(c, vg, tap, shunt);
    } catch (const ControlError& e) {
        throw InputFileError(source, 0, e.what());
    }
}

ControlVector read_control_file(const std::string& path, const NetworkCase& c) {
    std::ifstream in(path);
    if (!in) throw InputFileError(path, 0, "cannot open file");
    return parse_control_file(in, c, path);
}

ControlVector parse_control_list(const std::string& text, const NetworkCase& c) {
    std::string t = text;
    for (auto& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream ss(t);
    std::vector<double> all;
    std::string tok;
    while (ss >> tok) {
        double v;
        if (!parse_double(tok, v)) throw InputFileError("--vector", 0, "bad number '" + tok + "'");
        all.push_back(v);
    }
    const std::size_t nv = c.generators().size(), nt = c.transformers().size(), ns = c.shunts().size();
    if (all.size() != nv + nt + ns)
        throw InputFileError("--vector", 0,
                             "expected " + std::to_string(nv + nt + ns) + " values, got " + std::to_string(all.size()));
    const auto at = [&](std::size_t a, std::size_t b) {
        return std::vector<double>(all.begin() + static_cast<std::ptrdiff_t>(a), all.begin() + static_cast<std::ptrdiff_t>(b));
    };
    try {
        return controls_from_physical(c, at(0, nv), at(nv, nv + nt), at(nv + nt, nv + nt + ns));
    } catch (const ControlError& e) {
        throw InputFileError("--vector", 0, e.what());
    }
}

} // namespace orpd
