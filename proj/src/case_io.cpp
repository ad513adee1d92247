#include "fdid/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "fdid/error.hpp"

namespace fdid {

namespace {

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\'') quoted = !quoted;
        if (line[i] == '%' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw ParseError(line, "not a number: '" + token + "'");
    return v;
}

struct Block {
    std::size_t start_line = 0;
    std::vector<Row> rows;
    std::vector<std::size_t> row_lines;
};

// Splits matrix text into rows. A row ends at ';' or at a line break.
class MatrixReader {
public:
    MatrixReader(Block& block) : block_(block) {}

    // Consumes `text` from one physical line; returns true once ']' is seen.
    bool feed(const std::string& text, std::size_t line) {
        std::string token;
        auto flush_token = [&] {
            if (!token.empty()) {
                current_.push_back(parse_number(token, line));
                token.clear();
            }
        };
        for (char ch : text) {
            if (ch == ']') {
                flush_token();
                end_row(line);
                return true;
            }
            if (ch == ';') {
                flush_token();
                end_row(line);
            } else if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
                flush_token();
            } else {
                token.push_back(ch);
            }
        }
        flush_token();
        end_row(line);
        return false;
    }

private:
    void end_row(std::size_t line) {
        if (current_.empty()) return;
        if (!block_.rows.empty() && current_.size() != block_.rows.front().size()) {
            throw ParseError(line, "ragged matrix row: " + std::to_string(current_.size()) + " values, expected " +
                                       std::to_string(block_.rows.front().size()));
        }
        block_.rows.push_back(std::move(current_));
        block_.row_lines.push_back(line);
        current_.clear();
    }

    Block& block_;
    Row current_;
};

void require_width(const std::map<std::string, Block>& blocks, const std::string& name, std::size_t width) {
    const auto& b = blocks.at(name);
    if (!b.rows.empty() && b.rows.front().size() < width) {
        throw ParseError(b.start_line, "mpc." + name + " needs at least " + std::to_string(width) + " columns, found " +
                                           std::to_string(b.rows.front().size()));
    }
}

}  // namespace

RawCase parse_matpower(std::istream& text) {
    std::map<std::string, Block> blocks;
    std::optional<double> base_mva;

    std::string line;
    std::size_t line_no = 0;
    std::optional<std::string> open_name;
    std::optional<std::size_t> open_line;
    bool in_cell = false;
    std::unique_ptr<MatrixReader> reader;

    while (std::getline(text, line)) {
        ++line_no;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;

        if (in_cell) {
            if (body.find('}') != std::string::npos) in_cell = false;
            continue;
        }
        if (open_name) {
            if (reader->feed(body, line_no)) {
                open_name.reset();
                reader.reset();
            }
            continue;
        }

        const auto eq = body.find('=');
        if (body.rfind("mpc.", 0) != 0 || eq == std::string::npos) continue;
        const std::string name = trim(body.substr(4, eq - 4));
        std::string rhs = trim(body.substr(eq + 1));

        if (!rhs.empty() && rhs.front() == '[') {
            if (blocks.count(name)) throw ParseError(line_no, "duplicate block mpc." + name);
            auto& block = blocks[name];
            block.start_line = line_no;
            reader = std::make_unique<MatrixReader>(block);
            if (!reader->feed(rhs.substr(1), line_no)) {
                open_name = name;
                open_line = line_no;
            } else {
                reader.reset();
            }
        } else if (!rhs.empty() && rhs.front() == '{') {
            in_cell = rhs.find('}') == std::string::npos;
        } else if (name == "baseMVA") {
            if (!rhs.empty() && rhs.back() == ';') rhs.pop_back();
            base_mva = parse_number(trim(rhs), line_no);
        }
    }
    if (open_name) throw ParseError(*open_line, "unterminated matrix block mpc." + *open_name);

    for (const char* required : {"bus", "gen", "branch", "gencost"}) {
        if (!blocks.count(required)) throw StructuralError(std::string("missing required block mpc.") + required);
    }
    if (!base_mva) throw StructuralError("missing required scalar mpc.baseMVA");
    if (!(*base_mva > 0.0)) throw StructuralError("mpc.baseMVA must be positive");

    require_width(blocks, "bus", col::kBusWidth);
    require_width(blocks, "branch", col::kBranchWidth);
    require_width(blocks, "gen", col::kGenWidth);
    require_width(blocks, "gencost", 5);

    RawCase raw;
    raw.base_mva = *base_mva;
    raw.bus_rows = std::move(blocks["bus"].rows);
    raw.gen_rows = std::move(blocks["gen"].rows);
    raw.branch_rows = std::move(blocks["branch"].rows);
    raw.gencost_rows = std::move(blocks["gencost"].rows);
    return raw;
}

RawCase parse_matpower_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open case file " + path.string());
    return parse_matpower(in);
}

std::string write_matpower(const RawCase& raw, const std::string& name) {
    std::ostringstream out;
    out.precision(17);
    out << "function mpc = " << name << "\n";
    out << "mpc.version = '2';\n";
    out << "mpc.baseMVA = " << raw.base_mva << ";\n";
    auto block = [&](const char* label, const std::vector<Row>& rows) {
        out << "mpc." << label << " = [\n";
        for (const auto& r : rows) {
            out << '\t';
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
            out << ";\n";
        }
        out << "];\n";
    };
    block("bus", raw.bus_rows);
    block("gen", raw.gen_rows);
    block("branch", raw.branch_rows);
    block("gencost", raw.gencost_rows);
    return out.str();
}

namespace {

// First-order coefficient of a gencost row. Polynomial rows (model 2) store
// n coefficients highest order first; piecewise-linear rows (model 1) use the
// slope of the first segment.
double linear_cost_of(const Row& row) {
    const int model = static_cast<int>(row[0]);
    const auto n = static_cast<std::size_t>(row[3]);
    if (model == 2) {
        if (n < 2) return 0.0;
        if (row.size() < 4 + n) throw DataError("gencost row shorter than its coefficient count");
        return row[4 + n - 2];
    }
    if (model == 1) {
        if (n < 2 || row.size() < 4 + 2 * n) throw DataError("malformed piecewise-linear gencost row");
        const double dx = row[6] - row[4];
        return dx != 0.0 ? (row[7] - row[5]) / dx : 0.0;
    }
    throw DataError("unsupported gencost model " + std::to_string(model));
}

bool connected(std::size_t bus_count, const std::vector<Branch>& branches) {
    if (bus_count == 0) return true;
    std::vector<std::vector<std::size_t>> adj(bus_count);
    for (const auto& br : branches) {
        adj[br.from].push_back(br.to);
        adj[br.to].push_back(br.from);
    }
    std::vector<bool> seen(bus_count, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (auto v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                q.push(v);
            }
        }
    }
    return count == bus_count;
}

}  // namespace

Network validate_case(const RawCase& raw, const std::vector<std::size_t>& outaged_branches) {
    Network net;
    net.base_mva = raw.base_mva;

    std::map<int, std::size_t> bus_index;
    std::vector<std::size_t> ref_candidates;
    for (const auto& row : raw.bus_rows) {
        const int id = static_cast<int>(row[col::kBusId]);
        if (!bus_index.emplace(id, net.buses.size()).second) {
            throw StructuralError("duplicate bus id " + std::to_string(id));
        }
        Bus bus;
        bus.external_id = id;
        bus.index = net.buses.size();
        bus.load_mw = row[col::kBusPd];
        bus.is_load_bus = bus.load_mw > 0.0;
        if (static_cast<int>(row[col::kBusType]) == col::kRefBusType) ref_candidates.push_back(bus.index);
        net.buses.push_back(bus);
    }
    if (net.buses.empty()) throw StructuralError("case has no buses");
    if (ref_candidates.size() > 1) throw StructuralError("case declares more than one reference bus");

    auto lookup = [&](double id, const char* what) {
        auto it = bus_index.find(static_cast<int>(id));
        if (it == bus_index.end()) {
            throw StructuralError(std::string(what) + " refers to unknown bus " + std::to_string(static_cast<int>(id)));
        }
        return it->second;
    };

    if (!raw.gencost_rows.empty() && raw.gencost_rows.size() < raw.gen_rows.size()) {
        throw StructuralError("mpc.gencost has fewer rows than mpc.gen");
    }
    std::vector<int> gen_bus_ids;
    for (std::size_t g = 0; g < raw.gen_rows.size(); ++g) {
        const auto& row = raw.gen_rows[g];
        if (row[col::kGenStatus] <= 0.0) continue;
        Generator gen;
        gen.bus = lookup(row[col::kGenBus], "generator");
        gen.p_max = row[col::kGenPmax];
        gen.p_min = row[col::kGenPmin];
        if (gen.p_min > gen.p_max) throw DataError("generator at bus " + std::to_string(static_cast<int>(row[0])) + " has Pmin > Pmax");
        gen.linear_cost = linear_cost_of(raw.gencost_rows[g]);
        gen_bus_ids.push_back(static_cast<int>(row[col::kGenBus]));
        net.generators.push_back(gen);
    }

    if (!ref_candidates.empty()) {
        net.reference_bus = ref_candidates.front();
    } else if (!gen_bus_ids.empty()) {
        net.reference_bus = bus_index.at(*std::min_element(gen_bus_ids.begin(), gen_bus_ids.end()));
    } else {
        throw StructuralError("case has neither a reference bus nor an online generator");
    }

    const std::set<std::size_t> outages(outaged_branches.begin(), outaged_branches.end());
    for (auto ordinal : outages) {
        if (ordinal == 0 || ordinal > raw.branch_rows.size()) {
            throw StructuralError("outage refers to unknown branch " + std::to_string(ordinal));
        }
    }

    for (std::size_t i = 0; i < raw.branch_rows.size(); ++i) {
        const auto& row = raw.branch_rows[i];
        Branch br;
        br.ordinal = i + 1;
        br.from = lookup(row[col::kBrFrom], "branch");
        br.to = lookup(row[col::kBrTo], "branch");
        br.reactance = row[col::kBrX];
        br.limit_mw = row[col::kBrRateA];
        br.in_service = row[col::kBrStatus] > 0.0 && !outages.count(br.ordinal);
        if (!br.in_service) {
            net.outaged.push_back(br);
            continue;
        }
        if (br.reactance == 0.0) throw DataError("branch " + std::to_string(br.ordinal) + " has zero reactance");
        if (!(br.limit_mw > 0.0)) throw DataError("branch " + std::to_string(br.ordinal) + " has no positive thermal limit");
        if (br.from == br.to) throw StructuralError("branch " + std::to_string(br.ordinal) + " is a self-loop");
        net.branches.push_back(br);
    }

    if (!connected(net.buses.size(), net.branches)) {
        throw IslandError(outages.empty() ? "network is not connected"
                                          : "branch outages split the network into islands");
    }
    return net;
}

Network load_network(const std::filesystem::path& path, const std::vector<std::size_t>& outaged_branches) {
    return validate_case(parse_matpower_file(path), outaged_branches);
}

std::optional<std::size_t> Network::branch_position(std::size_t ordinal) const {
    auto it = std::lower_bound(branches.begin(), branches.end(), ordinal,
                               [](const Branch& b, std::size_t o) { return b.ordinal < o; });
    if (it == branches.end() || it->ordinal != ordinal) return std::nullopt;
    return static_cast<std::size_t>(it - branches.begin());
}

std::size_t Network::require_branch(std::size_t ordinal) const {
    if (auto pos = branch_position(ordinal)) return *pos;
    throw StructuralError("branch " + std::to_string(ordinal) + " is unknown or out of service");
}

Eigen::VectorXd Network::loads_mw() const {
    Eigen::VectorXd d(buses.size());
    for (const auto& b : buses) d[b.index] = b.load_mw;
    return d;
}

Eigen::VectorXd Network::limits_pu() const {
    Eigen::VectorXd lim(branches.size());
    for (std::size_t k = 0; k < branches.size(); ++k) lim[k] = branches[k].limit_mw / base_mva;
    return lim;
}

std::size_t Network::load_bus_count() const {
    return static_cast<std::size_t>(std::count_if(buses.begin(), buses.end(), [](const Bus& b) { return b.is_load_bus; }));
}

double Network::total_load_mw() const {
    return std::accumulate(buses.begin(), buses.end(), 0.0, [](double s, const Bus& b) { return s + b.load_mw; });
}

std::vector<std::size_t> parse_ordinal_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size() || v == 0) {
            throw ConfigError("bad branch ordinal '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace fdid
