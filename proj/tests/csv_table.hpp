#pragma once

// Minimal reader for the experiment CSVs: '#' metadata lines, one header row,
// numeric rows.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotor::testing {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> meta; ///< "# key: value" lines

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::runtime_error("missing column " + name);
    }
    std::vector<double> column(const std::string& name) const {
        const std::size_t c = col(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos && colon > 2) {
                auto v = line.substr(colon + 1);
                if (!v.empty() && v[0] == ' ') v.erase(0, 1);
                t.meta.emplace(line.substr(2, colon - 2), v);
            }
            continue;
        }
        if (t.header.empty()) {
            t.header = split_csv(line);
            continue;
        }
        std::vector<double> row;
        for (const auto& c : split_csv(line)) row.push_back(std::strtod(c.c_str(), nullptr));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace rotor::testing
