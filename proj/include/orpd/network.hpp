#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace orpd {

enum class BusKind { slack, generator, load };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::load;
    double p_load = 0.0;  // MW
    double q_load = 0.0;  // Mvar
    double g_shunt = 0.0; // MW consumed at 1 p.u.
    double b_shunt = 0.0; // Mvar injected at 1 p.u. (fixed compensation only)
    double v_min = 0.95;
    double v_max = 1.05;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_charging = 0.0;
    double s_max = 0.0; // MVA, 0 = unrated
    double tap_ratio = 1.0; // off-nominal ratio on the from side
    double shift_deg = 0.0;
    bool in_service = true;
    std::optional<std::size_t> tap_index; // into NetworkCase::transformers()
};

struct Generator {
    int bus = 0;
    double p_gen = 0.0; // MW, ignored at the slack bus
    double v_set = 1.0;
    double v_min = 0.9;
    double v_max = 1.1;
    double q_min = 0.0; // Mvar
    double q_max = 0.0;
};

struct Transformer {
    std::size_t branch = 0;
    double t_min = 0.9;
    double t_max = 1.1;
    double step = 0.01;

    /// Highest tap position; positions run 0..max_position().
    int max_position() const;
    double ratio_at(int position) const { return std::round((t_min + position * step) * 1e9) / 1e9; }
};

struct ShuntBank {
    int bus = 0;
    int bank_count = 0;
    double mvar_per_bank = 0.0;
    int banks_in_service = 0;
};

/// Hybrid control vector: continuous generator setpoints followed by
/// integer tap positions and switched bank counts.
struct ControlVector {
    std::vector<double> gen_v;
    std::vector<int> tap_steps;
    std::vector<int> shunt_banks;

    std::size_t dimension() const { return gen_v.size() + tap_steps.size() + shunt_banks.size(); }
    bool operator==(const ControlVector&) const = default;
};

struct ControlBounds {
    std::vector<double> v_lower;
    std::vector<double> v_upper;
    std::vector<int> tap_max;   // tap positions range over 0..tap_max[i]
    std::vector<int> shunt_max; // banks range over 0..shunt_max[i]

    std::size_t dimension() const { return v_lower.size() + tap_max.size() + shunt_max.size(); }
    bool operator==(const ControlBounds&) const = default;
};

class CaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed case text. Carries the 1-based line (0 when not line-specific).
class CaseParseError : public CaseError {
public:
    CaseParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class CaseValidationError : public CaseError {
public:
    using CaseError::CaseError;
};

/// Control vector that does not fit the case (wrong length or out of bounds).
class ControlError : public std::runtime_error {
public:
    ControlError(std::size_t index, const std::string& what);
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Validated, immutable power-system case.
class NetworkCase {
public:
    struct Tables {
        double base_mva = 100.0;
        bool flow_limits = true;
        std::vector<Bus> buses;
        std::vector<Branch> branches;
        std::vector<Generator> generators;
        std::vector<Transformer> transformers;
        std::vector<ShuntBank> shunts;
    };

    /// Validates every invariant and links transformers to their branches.
    /// Throws CaseValidationError naming the first violated invariant.
    static NetworkCase from_tables(Tables tables);

    double base_mva() const { return t_.base_mva; }
    bool flow_limits() const { return t_.flow_limits; }
    const std::vector<Bus>& buses() const { return t_.buses; }
    const std::vector<Branch>& branches() const { return t_.branches; }
    const std::vector<Generator>& generators() const { return t_.generators; }
    const std::vector<Transformer>& transformers() const { return t_.transformers; }
    const std::vector<ShuntBank>& shunts() const { return t_.shunts; }

    /// Position of a bus id in buses(). Throws std::out_of_range for unknown ids.
    std::size_t bus_index(int id) const { return bus_pos_.at(id); }
    std::size_t slack_index() const { return slack_; }
    const Tables& tables() const { return t_; }

    friend NetworkCase apply_controls(const NetworkCase& c, const ControlVector& u);

private:
    NetworkCase() = default;
    Tables t_;
    std::unordered_map<int, std::size_t> bus_pos_;
    std::size_t slack_ = 0;
};

/// Reads a case file (format described in README.md, "Case files").
NetworkCase load_case(const std::string& path);
NetworkCase parse_case(std::istream& in, const std::string& source = "<stream>");

ControlBounds control_bounds(const NetworkCase& c);

/// Copy of the case with generator setpoints, tap ratios and switched banks
/// replaced by u. Throws ControlError on length mismatch or bound violation.
NetworkCase apply_controls(const NetworkCase& c, const ControlVector& u);

/// Settings currently stored in the case. Off-grid tap ratios snap to the
/// nearest position and setpoints are clamped into their bounds.
ControlVector current_controls(const NetworkCase& c);

/// Throws ControlError if u does not fit b.
void check_controls(const ControlBounds& b, const ControlVector& u);

/// Table-style conversion: tap ratios (p.u.) and shunt Mvar to positions.
/// Throws ControlError when a value is off the tap/bank grid.
ControlVector controls_from_physical(const NetworkCase& c, const std::vector<double>& gen_v,
                                    const std::vector<double>& tap_ratios,
                                    const std::vector<double>& shunt_mvar);

/// Inverse of controls_from_physical for the discrete part.
std::vector<double> tap_ratios(const NetworkCase& c, const ControlVector& u);
std::vector<double> shunt_mvar(const NetworkCase& c, const ControlVector& u);

} // namespace orpd
