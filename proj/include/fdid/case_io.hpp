#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdid {

using Row = std::vector<double>;

// MATPOWER column positions used by this project (0-based).
namespace col {
inline constexpr std::size_t kBusId = 0, kBusType = 1, kBusPd = 2;
inline constexpr std::size_t kGenBus = 0, kGenPg = 1, kGenStatus = 7, kGenPmax = 8, kGenPmin = 9;
inline constexpr std::size_t kBrFrom = 0, kBrTo = 1, kBrX = 3, kBrRateA = 5, kBrStatus = 10;
inline constexpr std::size_t kBusWidth = 13, kBranchWidth = 13, kGenWidth = 10;
inline constexpr int kRefBusType = 3;
}  // namespace col

// Numeric content of a MATPOWER case exactly as read, in file order.
struct RawCase {
    double base_mva = 0.0;
    std::vector<Row> bus_rows;
    std::vector<Row> gen_rows;
    std::vector<Row> branch_rows;
    std::vector<Row> gencost_rows;
};

struct Bus {
    int external_id = 0;
    std::size_t index = 0;
    bool is_load_bus = false;
    double load_mw = 0.0;
};

struct Branch {
    std::size_t ordinal = 0;  // 1-based row position in the case file
    std::size_t from = 0;     // internal bus index
    std::size_t to = 0;
    double reactance = 0.0;   // p.u.
    double limit_mw = 0.0;
    bool in_service = true;
};

struct Generator {
    std::size_t bus = 0;
    double p_min = 0.0;  // MW
    double p_max = 0.0;
    double linear_cost = 0.0;  // $/MWh
};

// Validated DC network. `branches` holds only in-service branches, so every
// branch-indexed vector in the library is indexed by position in this list;
// removed branches are kept in `outaged` for reporting.
struct Network {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Branch> outaged;
    std::vector<Generator> generators;
    std::size_t reference_bus = 0;

    std::size_t bus_count() const { return buses.size(); }
    std::size_t branch_count() const { return branches.size(); }

    // Position of an external branch ordinal among in-service branches.
    std::optional<std::size_t> branch_position(std::size_t ordinal) const;
    // Throws StructuralError when the ordinal is unknown or out of service.
    std::size_t require_branch(std::size_t ordinal) const;

    Eigen::VectorXd loads_mw() const;
    Eigen::VectorXd limits_pu() const;
    std::size_t load_bus_count() const;
    double total_load_mw() const;
};

RawCase parse_matpower(std::istream& text);
RawCase parse_matpower_file(const std::filesystem::path& path);

// Writes bus/gen/branch/gencost matrices back out in MATPOWER syntax.
std::string write_matpower(const RawCase& raw, const std::string& name = "mpc_case");

Network validate_case(const RawCase& raw, const std::vector<std::size_t>& outaged_branches = {});

Network load_network(const std::filesystem::path& path, const std::vector<std::size_t>& outaged_branches = {});

// Parses "1,71,141" as used by the --outage flag.
std::vector<std::size_t> parse_ordinal_list(const std::string& text);

}  // namespace fdid
