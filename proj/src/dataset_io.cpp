#include "sgnet/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgnet/error.hpp"

namespace sgnet {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string graph_file(const char* prefix, std::size_t n) {
    return std::string(prefix) + "_" + std::to_string(n) + ".csv";
}

[[noreturn]] void cell_error(const fs::path& file, std::size_t row, std::size_t col,
                             const std::string& what) {
    throw ParseError(file.string() + ": row " + std::to_string(row + 1) + ", column " +
                     std::to_string(col + 1) + ": " + what);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_matrix_csv(const Matrix& m, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    std::string line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) line += ',';
            line += format_double(m(r, c));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for " + file.string());
}

Matrix read_matrix_csv(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t col = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            const char* comma = std::find(p, end, ',');
            const char* b = p;
            const char* e = comma;
            while (b < e && (*b == ' ' || *b == '\t')) ++b;
            while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
            if (b == e) cell_error(file, rows, col, "empty cell");
            double v = 0.0;
            const auto res = std::from_chars(b, e, v);
            if (res.ec == std::errc::result_out_of_range)
                cell_error(file, rows, col, "value '" + std::string(b, e) + "' out of range");
            if (res.ec != std::errc() || res.ptr != e)
                cell_error(file, rows, col, "bad number '" + std::string(b, e) + "'");
            if (!std::isfinite(v)) cell_error(file, rows, col, "non-finite value");
            data.push_back(v);
            ++col;
            if (comma == end) break;
            p = comma + 1;
        }
        if (rows == 0) cols = col;
        else if (col != cols)
            throw ParseError(file.string() + ": row " + std::to_string(rows + 1) + " has " +
                             std::to_string(col) + " columns, expected " + std::to_string(cols));
        ++rows;
    }
    if (rows == 0) throw ParseError(file.string() + ": empty matrix file");
    return Matrix(rows, cols, std::move(data));
}

Matrix read_graph_csv(const fs::path& file) {
    Matrix m = read_matrix_csv(file);
    if (m.rows() != m.cols())
        throw ParseError(file.string() + ": dimension error, matrix is " + m.shape_str() +
                         " but must be square");
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (m(i, i) != 0.0) cell_error(file, i, i, "diagonal entry must be 0");
        for (std::size_t j = 0; j < n; ++j) {
            if (m(i, j) < 0.0 || m(i, j) > 1.0) cell_error(file, i, j, "entry outside [0,1]");
            if (j > i) {
                const double d = std::abs(m(i, j) - m(j, i));
                if (d > 1e-6) cell_error(file, i, j, "asymmetric beyond 1e-6");
                if (d > 0.0) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));
            }
        }
    }
    return m;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const Resolutions res = ds.resolutions();
    json manifest;
    manifest["format"] = "sgnet-dataset";
    manifest["version"] = 1;
    manifest["seed"] = ds.seed();
    manifest["provenance"] = ds.provenance() == Provenance::Synthetic ? "synthetic" : "loaded";
    manifest["shift"] = {{"mean", ds.shift().mean}, {"std", ds.shift().std}};
    manifest["resolutions"] = {
        {"source", res.source}, {"target_lr", res.target_lr}, {"target_hr", res.target_hr}};
    manifest["subjects"] = ds.ids();
    for (const auto& s : ds.subjects()) {
        const fs::path sub = dir / s.subject_id;
        fs::create_directories(sub, ec);
        if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
        write_matrix_csv(s.source.adjacency(), sub / graph_file("source", res.source));
        write_matrix_csv(s.target_lr.adjacency(), sub / graph_file("target", res.target_lr));
        write_matrix_csv(s.target_hr.adjacency(), sub / graph_file("target", res.target_hr));
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    std::ifstream in(mpath);
    if (!in) throw IoError("cannot open " + mpath.string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ParseError(mpath.string() + ": " + e.what());
    }
    try {
        const Resolutions res{manifest.at("resolutions").at("source").get<std::size_t>(),
                              manifest.at("resolutions").at("target_lr").get<std::size_t>(),
                              manifest.at("resolutions").at("target_hr").get<std::size_t>()};
        const DomainShift shift{manifest.at("shift").at("mean").get<double>(),
                                manifest.at("shift").at("std").get<double>()};
        const auto seed = manifest.at("seed").get<std::uint64_t>();
        std::vector<SubjectTriple> subjects;
        for (const auto& id_json : manifest.at("subjects")) {
            const std::string id = id_json.get<std::string>();
            const fs::path sub = dir / id;
            auto load = [&](const char* prefix, std::size_t n, Modality m) {
                const fs::path f = sub / graph_file(prefix, n);
                Matrix a = read_graph_csv(f);
                if (a.rows() != n)
                    throw ParseError(f.string() + ": dimension error, expected " +
                                     std::to_string(n) + "x" + std::to_string(n) + ", got " +
                                     a.shape_str());
                return BrainGraph(std::move(a), m);
            };
            subjects.push_back({id, load("source", res.source, Modality::Morphological),
                                load("target", res.target_lr, Modality::Functional),
                                load("target", res.target_hr, Modality::Functional)});
        }
        return Dataset(std::move(subjects), seed, shift, Provenance::Loaded);
    } catch (const json::exception& e) {
        throw ParseError(mpath.string() + ": " + e.what());
    }
}

}  // namespace sgnet
