#include "lif/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lif {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_lattice_csv(const std::string& path, const Lattice& lat) {
    auto f = open_out(path);
    static const char* axes[3] = {"x", "y", "z"};
    for (int a = 0; a < lat.dim; ++a) f << (a ? "," : "") << axes[a];
    f << "\n";
    for (std::size_t i = 0; i < lat.n(); ++i) {
        const double* p = lat.point(i);
        for (int a = 0; a < lat.dim; ++a) f << (a ? "," : "") << format_double(p[a]);
        f << "\n";
    }
}

Lattice read_lattice_csv(const std::string& path, double side) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty lattice file: " + path);
    const int dim = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
    if (dim < 1 || dim > 3) throw std::runtime_error("bad lattice header: " + line);
    Lattice lat;
    lat.dim = dim;
    lat.side = side;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int a = 0;
        while (std::getline(ss, cell, ',')) {
            lat.points.push_back(std::stod(cell));
            ++a;
        }
        if (a != dim) throw std::runtime_error("ragged lattice row: " + line);
    }
    return lat;
}

void write_lattice_meta(const std::string& path, const Lattice& lat, double delta,
                        std::uint64_t seed) {
    nlohmann::json j;
    j["dim"] = lat.dim;
    j["side"] = lat.side;
    j["n"] = lat.n();
    j["delta"] = delta;
    j["seed"] = seed;
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

void write_vector_csv(const std::string& path, const std::string& header,
                      const Eigen::VectorXd& values) {
    auto f = open_out(path);
    f << header << "\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) f << format_double(values[i]) << "\n";
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path);
    std::vector<double> vals;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        vals.push_back(std::stod(line));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

void write_partition_csv(const std::string& path, const Partition& part) {
    auto f = open_out(path);
    f << "site_index,bin_id\n";
    for (std::size_t i = 0; i < part.bin_of.size(); ++i) f << i << "," << part.bin_of[i] << "\n";
}

void write_coeffs_csv(const std::string& path, const PreconditionerCoeffs& pc) {
    auto f = open_out(path);
    f << "site_index,neighbor_index,coefficient\n";
    for (std::size_t s = 0; s < pc.sites.size(); ++s) {
        const SiteStencil& st = pc.sites[s];
        for (std::size_t j = 0; j < st.neighbors.size(); ++j)
            f << s << "," << st.neighbors[j] << "," << format_double(st.coeffs[j]) << "\n";
    }
}

std::vector<std::tuple<std::int32_t, std::int32_t, double>> read_coeffs_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty coefficients file: " + path);
    std::vector<std::tuple<std::int32_t, std::int32_t, double>> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw std::runtime_error("ragged coefficients row: " + line);
        out.emplace_back(std::stoi(a), std::stoi(b), std::stod(c));
    }
    return out;
}

}  // namespace lif
