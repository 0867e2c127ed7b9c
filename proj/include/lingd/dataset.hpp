#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lingd/errors.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

// n samples of d named variables, one sample per row.
struct Dataset {
    std::vector<std::string> names;
    Matrix values;  // n x d

    Index n() const { return values.rows(); }
    Index d() const { return values.cols(); }

    int column(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name) return static_cast<int>(j);
        throw Error("dataset: no column named '" + name + "'");
    }

    void validate() const {
        if (values.rows() < 1 || values.cols() < 1)
            throw Error("dataset: empty");
        if (static_cast<Index>(names.size()) != values.cols())
            throw Error("dataset: header/column count mismatch");
        std::set<std::string> uniq(names.begin(), names.end());
        if (static_cast<Index>(uniq.size()) != values.cols())
            throw Error("dataset: duplicate column names");
        if (!values.allFinite())
            throw Error("dataset: non-finite entry");
    }
};

namespace detail {
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}
}  // namespace detail

// CSV with a mandatory header row; shortest round-trip decimal floats.
inline void write_csv(const Dataset& data, std::ostream& os) {
    for (std::size_t j = 0; j < data.names.size(); ++j)
        os << (j ? "," : "") << data.names[j];
    os << "\n";
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.d(); ++j)
            os << (j ? "," : "") << detail::format_double(data.values(i, j));
        os << "\n";
    }
}

inline void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_csv(data, os);
}

inline Dataset read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("csv: missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Dataset data;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) data.names.push_back(cell);
    }
    const std::size_t d = data.names.size();
    if (d == 0) throw Error("csv: empty header");
    std::vector<double> buffer;
    Index n = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(row, cell, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                throw Error("csv: bad number '" + cell + "'");
            buffer.push_back(v);
            ++j;
        }
        if (j != d) throw Error("csv: row width mismatch");
        ++n;
    }
    data.values.resize(n, static_cast<Index>(d));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < static_cast<Index>(d); ++j)
            data.values(i, j) = buffer[static_cast<std::size_t>(i) * d + j];
    data.validate();
    return data;
}

inline Dataset read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_csv(is);
}

}  // namespace lingd
