#include "openturb/csv.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace openturb {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::vector<double>> parse_table(const std::string& text,
                                             const std::string& header,
                                             std::size_t n_cols) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw std::invalid_argument("unexpected CSV header '" + line +
                                    "', expected '" + header + "'");
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != n_cols)
            throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                        " has " + std::to_string(cells.size()) +
                                        " fields, expected " +
                                        std::to_string(n_cols));
        std::vector<double> row(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            try {
                std::size_t used = 0;
                row[c] = std::stod(cells[c], &used);
                if (used != cells[c].size()) throw std::invalid_argument("");
            } catch (...) {
                throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                            ": bad number '" + cells[c] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

constexpr const char* kMomentsHeader = "t,x2,x2_se,p2,p2_se,xp,xp_se";
constexpr const char* kOracleHeader = "t,p2_exact,x2_exact";

}  // namespace

std::string moments_csv(const EnsembleMoments& s) {
    std::string out{kMomentsHeader};
    out += '\n';
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        out += format_full(s.times[i]) + ',' + format_full(s.x2[i]) + ',' +
               format_full(s.x2_se[i]) + ',' + format_full(s.p2[i]) + ',' +
               format_full(s.p2_se[i]) + ',' + format_full(s.xp[i]) + ',' +
               format_full(s.xp_se[i]) + '\n';
    }
    return out;
}

EnsembleMoments parse_moments_csv(const std::string& text) {
    const auto rows = parse_table(text, kMomentsHeader, 7);
    EnsembleMoments s;
    for (const auto& r : rows) {
        s.times.push_back(r[0]);
        s.x2.push_back(r[1]);
        s.x2_se.push_back(r[2]);
        s.p2.push_back(r[3]);
        s.p2_se.push_back(r[4]);
        s.xp.push_back(r[5]);
        s.xp_se.push_back(r[6]);
    }
    return s;
}

std::string oracle_table_csv(const OracleTable& table) {
    std::string out{kOracleHeader};
    out += '\n';
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        out += format_full(table.times[i]) + ',' + format_full(table.p2[i]) +
               ',' + format_full(table.x2[i]) + '\n';
    }
    return out;
}

OracleTable parse_oracle_table_csv(const std::string& text) {
    const auto rows = parse_table(text, kOracleHeader, 3);
    OracleTable t;
    for (const auto& r : rows) {
        t.times.push_back(r[0]);
        t.p2.push_back(r[1]);
        t.x2.push_back(r[2]);
    }
    return t;
}

std::string regime_csv(std::span<const RegimeReport> reports) {
    std::string out = "t_start,t_end,exponent,exponent_se,classification\n";
    for (const auto& r : reports) {
        out += format_full(r.t_start) + ',' + format_full(r.t_end) + ',' +
               format_full(r.exponent) + ',' + format_full(r.exponent_se) +
               ',' + to_string(r.classification) + '\n';
    }
    return out;
}

std::string deviation_csv(const DeviationReport& report) {
    std::string out = "t,x2_z,p2_z\n";
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        out += format_full(report.times[i]) + ',' +
               format_full(report.x2_z[i]) + ',' + format_full(report.p2_z[i]) +
               '\n';
    }
    return out;
}

std::string energy_csv(std::span<const EnergyBudgetPoint> points) {
    std::string out =
        "t,injection,dissipation,net,observed_rate,residual,residual_se\n";
    for (const auto& p : points) {
        out += format_full(p.t) + ',' + format_full(p.budget.injection) + ',' +
               format_full(p.budget.dissipation) + ',' +
               format_full(p.budget.net) + ',' +
               format_full(p.budget.observed_rate) + ',' +
               format_full(p.budget.residual) + ',' +
               format_full(p.residual_se) + '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string grid_csv(const PhaseSpaceGrid& grid) {
    std::string out = "x,p,W\n";
    for (std::size_t i = 0; i < grid.geom.nx; ++i)
        for (std::size_t j = 0; j < grid.geom.np; ++j)
            out += format_full(grid.x_center(i)) + ',' +
                   format_full(grid.p_center(j)) + ',' +
                   format_full(grid.at(i, j)) + '\n';
    return out;
}

namespace {

constexpr char kMagic[4] = {'O', 'T', 'F', 'P'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated grid file");
    return v;
}

}  // namespace

void write_grid_binary(const std::filesystem::path& path,
                       const PhaseSpaceGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out.write(kMagic, 4);
    put(out, static_cast<std::uint64_t>(grid.geom.nx));
    put(out, static_cast<std::uint64_t>(grid.geom.np));
    put(out, grid.geom.x_min);
    put(out, grid.geom.x_max);
    put(out, grid.geom.p_min);
    put(out, grid.geom.p_max);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

PhaseSpaceGrid read_grid_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path.string() + " is not an OTFP grid file");
    GridGeometry geom;
    geom.nx = get<std::uint64_t>(in);
    geom.np = get<std::uint64_t>(in);
    geom.x_min = get<double>(in);
    geom.x_max = get<double>(in);
    geom.p_min = get<double>(in);
    geom.p_max = get<double>(in);
    PhaseSpaceGrid grid(geom);
    in.read(reinterpret_cast<char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated grid file");
    return grid;
}

}  // namespace openturb
