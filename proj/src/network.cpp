#include "orpd/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace orpd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

struct Row {
    std::size_t line;
    std::vector<std::string> fields;
};

class RowReader {
public:
    RowReader(const std::string& source, const Row& row, const std::string& section)
        : source_(source), row_(row), section_(section) {}

    void require(std::size_t n) const {
        if (row_.fields.size() < n) {
            fail("[" + section_ + "] expects at least " + std::to_string(n) + " fields, got " +
                 std::to_string(row_.fields.size()));
        }
    }

    double num(std::size_t i, const char* name) const {
        const auto& tok = row_.fields.at(i);
        double v = 0.0;
        const auto* end = tok.data() + tok.size();
        auto [ptr, ec] = std::from_chars(tok.data(), end, v);
        if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
            fail("[" + section_ + "] field " + std::to_string(i + 1) + " (" + name +
                 "): expected a number, got '" + tok + "'");
        }
        return v;
    }

    double num_or(std::size_t i, const char* name, double fallback) const {
        return i < row_.fields.size() ? num(i, name) : fallback;
    }

    int integer(std::size_t i, const char* name) const {
        const double v = num(i, name);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            fail("[" + section_ + "] field " + std::to_string(i + 1) + " (" + name +
                 "): expected an integer, got '" + row_.fields.at(i) + "'");
        }
        return static_cast<int>(v);
    }

    [[noreturn]] void fail(const std::string& msg) const { throw CaseParseError(source_, row_.line, msg); }

private:
    const std::string& source_;
    const Row& row_;
    const std::string& section_;
};

[[noreturn]] void invalid(const std::string& msg) { throw CaseValidationError("invalid case: " + msg); }

bool is_integral(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

} // namespace

CaseParseError::CaseParseError(const std::string& source, std::size_t line, const std::string& what)
    : CaseError(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what), line_(line) {}

ControlError::ControlError(std::size_t index, const std::string& what)
    : std::runtime_error("control " + std::to_string(index) + ": " + what), index_(index) {}

int Transformer::max_position() const { return static_cast<int>(std::lround((t_max - t_min) / step)); }

NetworkCase NetworkCase::from_tables(Tables t) {
    if (!(t.base_mva > 0.0)) invalid("base_mva must be positive");
    if (t.buses.empty()) invalid("no buses");

    NetworkCase c;
    std::size_t slack_count = 0;
    for (std::size_t i = 0; i < t.buses.size(); ++i) {
        const auto& b = t.buses[i];
        if (!c.bus_pos_.emplace(b.id, i).second) invalid("duplicate bus id " + std::to_string(b.id));
        if (!(b.v_min < b.v_max)) invalid("bus " + std::to_string(b.id) + ": v_min must be below v_max");
        if (b.kind == BusKind::slack) {
            ++slack_count;
            c.slack_ = i;
        }
    }
    if (slack_count != 1) invalid("expected exactly one slack bus, found " + std::to_string(slack_count));

    auto known = [&](int id) { return c.bus_pos_.count(id) > 0; };

    for (std::size_t k = 0; k < t.branches.size(); ++k) {
        auto& br = t.branches[k];
        const std::string tag = "branch " + std::to_string(k + 1);
        if (!known(br.from_bus) || !known(br.to_bus)) invalid(tag + ": unknown bus");
        if (br.from_bus == br.to_bus) invalid(tag + ": from_bus equals to_bus");
        if (br.x == 0.0) invalid(tag + ": zero series reactance");
        if (br.s_max < 0.0) invalid(tag + ": negative rating");
        if (!(br.tap_ratio > 0.0)) invalid(tag + ": tap ratio must be positive");
        br.tap_index.reset();
    }

    std::unordered_set<int> gen_buses;
    for (std::size_t g = 0; g < t.generators.size(); ++g) {
        const auto& gen = t.generators[g];
        const std::string tag = "generator " + std::to_string(g + 1);
        if (!known(gen.bus)) invalid(tag + ": unknown bus " + std::to_string(gen.bus));
        if (t.buses[c.bus_pos_.at(gen.bus)].kind == BusKind::load)
            invalid(tag + ": bus " + std::to_string(gen.bus) + " is a load bus");
        if (!gen_buses.insert(gen.bus).second) invalid(tag + ": second generator on bus " + std::to_string(gen.bus));
        if (!(gen.q_min < gen.q_max)) invalid(tag + ": q_min must be below q_max");
        if (!(gen.v_min < gen.v_max)) invalid(tag + ": v_min must be below v_max");
    }
    for (const auto& b : t.buses) {
        if (b.kind != BusKind::load && !gen_buses.count(b.id))
            invalid("bus " + std::to_string(b.id) + " is voltage controlled but has no generator");
    }

    for (std::size_t k = 0; k < t.transformers.size(); ++k) {
        const auto& tr = t.transformers[k];
        const std::string tag = "transformer " + std::to_string(k + 1);
        if (tr.branch >= t.branches.size()) invalid(tag + ": branch reference out of range");
        if (!(tr.t_min < tr.t_max)) invalid(tag + ": t_min must be below t_max");
        if (!(tr.step > 0.0)) invalid(tag + ": step must be positive");
        if (!is_integral((tr.t_max - tr.t_min) / tr.step, 1e-6))
            invalid(tag + ": tap range is not a whole number of steps");
        auto& br = t.branches[tr.branch];
        if (br.tap_index) invalid(tag + ": branch already has a tap changer");
        br.tap_index = k;
    }

    std::unordered_set<int> shunt_buses;
    for (std::size_t k = 0; k < t.shunts.size(); ++k) {
        const auto& s = t.shunts[k];
        const std::string tag = "shunt " + std::to_string(k + 1);
        if (!known(s.bus)) invalid(tag + ": unknown bus " + std::to_string(s.bus));
        if (!shunt_buses.insert(s.bus).second) invalid(tag + ": second shunt site on bus " + std::to_string(s.bus));
        if (s.bank_count < 1) invalid(tag + ": bank_count must be at least 1");
        if (!(s.mvar_per_bank > 0.0)) invalid(tag + ": mvar_per_bank must be positive");
        if (s.banks_in_service < 0 || s.banks_in_service > s.bank_count)
            invalid(tag + ": banks in service outside 0..bank_count");
    }

    // connectivity over in-service branches
    std::vector<std::vector<std::size_t>> adj(t.buses.size());
    for (const auto& br : t.branches) {
        if (!br.in_service) continue;
        const auto f = c.bus_pos_.at(br.from_bus);
        const auto to = c.bus_pos_.at(br.to_bus);
        adj[f].push_back(to);
        adj[to].push_back(f);
    }
    std::vector<bool> seen(t.buses.size(), false);
    std::queue<std::size_t> q;
    q.push(c.slack_);
    seen[c.slack_] = true;
    std::size_t reached = 1;
    while (!q.empty()) {
        const auto i = q.front();
        q.pop();
        for (auto j : adj[i]) {
            if (!seen[j]) {
                seen[j] = true;
                ++reached;
                q.push(j);
            }
        }
    }
    if (reached != t.buses.size()) invalid("network is not connected");

    c.t_ = std::move(t);
    return c;
}

NetworkCase parse_case(std::istream& in, const std::string& source) {
    std::unordered_map<std::string, std::vector<Row>> sections;
    const std::unordered_set<std::string> known = {"base_mva", "options", "bus", "branch",
                                                   "generator", "transformer", "shunt"};
    std::string current;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw CaseParseError(source, lineno, "unterminated section header");
            current = trim(line.substr(1, line.size() - 2));
            if (!known.count(current)) throw CaseParseError(source, lineno, "unknown section [" + current + "]");
            if (sections.count(current)) throw CaseParseError(source, lineno, "repeated section [" + current + "]");
            sections[current];
            continue;
        }
        if (current.empty()) throw CaseParseError(source, lineno, "data outside of a section");
        sections[current].push_back({lineno, split_ws(line)});
    }

    for (const char* required : {"base_mva", "bus", "branch", "generator"}) {
        if (!sections.count(required))
            throw CaseParseError(source, 0, std::string("missing section [") + required + "]");
    }

    NetworkCase::Tables t;
    {
        const auto& rows = sections["base_mva"];
        if (rows.size() != 1 || rows[0].fields.size() != 1)
            throw CaseParseError(source, rows.empty() ? 0 : rows[0].line, "[base_mva] expects a single value");
        t.base_mva = RowReader(source, rows[0], "base_mva").num(0, "base_mva");
    }
    for (const auto& row : sections["options"]) {
        RowReader rd(source, row, "options");
        if (row.fields.size() != 2) rd.fail("[options] expects 'key value'");
        if (row.fields[0] == "flow_limits") {
            const auto& v = row.fields[1];
            if (v == "on" || v == "1") t.flow_limits = true;
            else if (v == "off" || v == "0") t.flow_limits = false;
            else rd.fail("flow_limits must be on/off");
        } else {
            rd.fail("unknown option '" + row.fields[0] + "'");
        }
    }
    for (const auto& row : sections["bus"]) {
        RowReader rd(source, row, "bus");
        rd.require(13);
        Bus b;
        b.id = rd.integer(0, "bus_i");
        switch (rd.integer(1, "type")) {
        case 1: b.kind = BusKind::load; break;
        case 2: b.kind = BusKind::generator; break;
        case 3: b.kind = BusKind::slack; break;
        default: rd.fail("[bus] field 2 (type): expected 1 (PQ), 2 (PV) or 3 (slack)");
        }
        b.p_load = rd.num(2, "Pd");
        b.q_load = rd.num(3, "Qd");
        b.g_shunt = rd.num(4, "Gs");
        b.b_shunt = rd.num(5, "Bs");
        b.v_max = rd.num(11, "Vmax");
        b.v_min = rd.num(12, "Vmin");
        t.buses.push_back(b);
    }
    for (const auto& row : sections["generator"]) {
        RowReader rd(source, row, "generator");
        rd.require(10);
        if (rd.num(7, "status") <= 0.0) continue;
        Generator g;
        g.bus = rd.integer(0, "bus");
        g.p_gen = rd.num(1, "Pg");
        g.q_max = rd.num(3, "Qmax");
        g.q_min = rd.num(4, "Qmin");
        g.v_set = rd.num(5, "Vg");
        g.v_max = rd.num_or(10, "Vgmax", 1.1);
        g.v_min = rd.num_or(11, "Vgmin", 0.9);
        t.generators.push_back(g);
    }
    for (const auto& row : sections["branch"]) {
        RowReader rd(source, row, "branch");
        rd.require(11);
        Branch br;
        br.from_bus = rd.integer(0, "fbus");
        br.to_bus = rd.integer(1, "tbus");
        br.r = rd.num(2, "r");
        br.x = rd.num(3, "x");
        br.b_charging = rd.num(4, "b");
        br.s_max = rd.num(5, "rateA");
        const double ratio = rd.num(8, "ratio");
        br.tap_ratio = ratio == 0.0 ? 1.0 : ratio;
        br.shift_deg = rd.num(9, "angle");
        br.in_service = rd.num(10, "status") > 0.0;
        t.branches.push_back(br);
    }
    for (const auto& row : sections["transformer"]) {
        RowReader rd(source, row, "transformer");
        rd.require(4);
        Transformer tr;
        const int branch = rd.integer(0, "branch");
        if (branch < 1 || static_cast<std::size_t>(branch) > t.branches.size())
            rd.fail("[transformer] field 1 (branch): no branch row " + std::to_string(branch));
        tr.branch = static_cast<std::size_t>(branch - 1);
        tr.t_min = rd.num(1, "Tmin");
        tr.t_max = rd.num(2, "Tmax");
        tr.step = rd.num(3, "step");
        t.transformers.push_back(tr);
    }
    for (const auto& row : sections["shunt"]) {
        RowReader rd(source, row, "shunt");
        rd.require(3);
        ShuntBank s;
        s.bus = rd.integer(0, "bus");
        s.bank_count = rd.integer(1, "banks");
        s.mvar_per_bank = rd.num(2, "Mvar_per_bank");
        s.banks_in_service = row.fields.size() > 3 ? rd.integer(3, "banks_in_service") : 0;
        t.shunts.push_back(s);
    }
    return NetworkCase::from_tables(std::move(t));
}

NetworkCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CaseParseError(path, 0, "cannot open case file");
    return parse_case(in, path);
}

ControlBounds control_bounds(const NetworkCase& c) {
    ControlBounds b;
    for (const auto& g : c.generators()) {
        b.v_lower.push_back(g.v_min);
        b.v_upper.push_back(g.v_max);
    }
    for (const auto& tr : c.transformers()) b.tap_max.push_back(tr.max_position());
    for (const auto& s : c.shunts()) b.shunt_max.push_back(s.bank_count);
    return b;
}

void check_controls(const ControlBounds& b, const ControlVector& u) {
    if (u.gen_v.size() != b.v_lower.size())
        throw ControlError(0, "expected " + std::to_string(b.v_lower.size()) + " generator setpoints, got " +
                                  std::to_string(u.gen_v.size()));
    if (u.tap_steps.size() != b.tap_max.size())
        throw ControlError(b.v_lower.size(), "expected " + std::to_string(b.tap_max.size()) +
                                                 " tap positions, got " + std::to_string(u.tap_steps.size()));
    if (u.shunt_banks.size() != b.shunt_max.size())
        throw ControlError(b.v_lower.size() + b.tap_max.size(),
                           "expected " + std::to_string(b.shunt_max.size()) + " shunt settings, got " +
                               std::to_string(u.shunt_banks.size()));
    std::size_t idx = 0;
    for (std::size_t i = 0; i < u.gen_v.size(); ++i, ++idx) {
        if (!(u.gen_v[i] >= b.v_lower[i] && u.gen_v[i] <= b.v_upper[i]))
            throw ControlError(idx, "generator setpoint outside its bounds");
    }
    for (std::size_t i = 0; i < u.tap_steps.size(); ++i, ++idx) {
        if (u.tap_steps[i] < 0 || u.tap_steps[i] > b.tap_max[i])
            throw ControlError(idx, "tap position " + std::to_string(u.tap_steps[i]) + " outside 0.." +
                                        std::to_string(b.tap_max[i]));
    }
    for (std::size_t i = 0; i < u.shunt_banks.size(); ++i, ++idx) {
        if (u.shunt_banks[i] < 0 || u.shunt_banks[i] > b.shunt_max[i])
            throw ControlError(idx, "bank count " + std::to_string(u.shunt_banks[i]) + " outside 0.." +
                                        std::to_string(b.shunt_max[i]));
    }
}

NetworkCase apply_controls(const NetworkCase& c, const ControlVector& u) {
    check_controls(control_bounds(c), u);
    NetworkCase out = c;
    auto& t = out.t_;
    for (std::size_t i = 0; i < u.gen_v.size(); ++i) t.generators[i].v_set = u.gen_v[i];
    for (std::size_t i = 0; i < u.tap_steps.size(); ++i) {
        const auto& tr = t.transformers[i];
        t.branches[tr.branch].tap_ratio = tr.ratio_at(u.tap_steps[i]);
    }
    for (std::size_t i = 0; i < u.shunt_banks.size(); ++i) t.shunts[i].banks_in_service = u.shunt_banks[i];
    return out;
}

ControlVector current_controls(const NetworkCase& c) {
    ControlVector u;
    for (const auto& g : c.generators()) u.gen_v.push_back(std::clamp(g.v_set, g.v_min, g.v_max));
    for (const auto& tr : c.transformers()) {
        const double pos = (c.branches()[tr.branch].tap_ratio - tr.t_min) / tr.step;
        u.tap_steps.push_back(std::clamp(static_cast<int>(std::lround(pos)), 0, tr.max_position()));
    }
    for (const auto& s : c.shunts()) u.shunt_banks.push_back(s.banks_in_service);
    return u;
}

ControlVector controls_from_physical(const NetworkCase& c, const std::vector<double>& gen_v,
                                    const std::vector<double>& ratios, const std::vector<double>& mvar) {
    ControlVector u;
    u.gen_v = gen_v;
    const std::size_t ng = c.generators().size();
    if (ratios.size() != c.transformers().size())
        throw ControlError(ng, "expected " + std::to_string(c.transformers().size()) + " tap ratios, got " +
                                   std::to_string(ratios.size()));
    if (mvar.size() != c.shunts().size())
        throw ControlError(ng + ratios.size(), "expected " + std::to_string(c.shunts().size()) +
                                                   " shunt values, got " + std::to_string(mvar.size()));
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const auto& tr = c.transformers()[i];
        const double pos = (ratios[i] - tr.t_min) / tr.step;
        if (!is_integral(pos, 1e-6)) throw ControlError(ng + i, "tap ratio is not on the step grid");
        u.tap_steps.push_back(static_cast<int>(std::lround(pos)));
    }
    for (std::size_t i = 0; i < mvar.size(); ++i) {
        const double banks = mvar[i] / c.shunts()[i].mvar_per_bank;
        if (!is_integral(banks, 1e-6))
            throw ControlError(ng + ratios.size() + i, "shunt Mvar is not a whole number of banks");
        u.shunt_banks.push_back(static_cast<int>(std::lround(banks)));
    }
    check_controls(control_bounds(c), u);
    return u;
}

std::vector<double> tap_ratios(const NetworkCase& c, const ControlVector& u) {
    std::vector<double> out;
    for (std::size_t i = 0; i < u.tap_steps.size(); ++i) out.push_back(c.transformers().at(i).ratio_at(u.tap_steps[i]));
    return out;
}

std::vector<double> shunt_mvar(const NetworkCase& c, const ControlVector& u) {
    std::vector<double> out;
    for (std::size_t i = 0; i < u.shunt_banks.size(); ++i)
        out.push_back(u.shunt_banks[i] * c.shunts().at(i).mvar_per_bank);
    return out;
}

} // namespace orpd
