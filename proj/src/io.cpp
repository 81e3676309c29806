#include "thermores/io.hpp"
#include "thermores/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace thermores::io {

namespace {

void require_stream(const std::ios& s, const std::filesystem::path& path, const char* what) {
    if (!s) throw std::runtime_error(std::string(what) + ": " + path.string());
}

std::filesystem::path sidecar_path(std::filesystem::path bin_path) {
    bin_path.replace_extension(".json");
    return bin_path;
}

void write_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream f(path, std::ios::binary);
    require_stream(f, path, "cannot open for writing");
    // row-major stream regardless of Eigen's internal layout
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            f.write(reinterpret_cast<const char*>(&v), sizeof(double));
        }
    require_stream(f, path, "write failed");
}

Eigen::MatrixXd read_matrix_binary(const std::filesystem::path& path, long rows, long cols) {
    std::ifstream f(path, std::ios::binary);
    require_stream(f, path, "cannot open for reading");
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) {
            double v;
            f.read(reinterpret_cast<char*>(&v), sizeof(double));
            if (!f) throw std::runtime_error("binary field truncated: " + path.string());
            m(i, j) = v;
        }
    return m;
}

}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_indexed_csv(const std::filesystem::path& path, const std::string& index_name,
                       const std::string& column_prefix, const std::vector<double>& index,
                       const Eigen::MatrixXd& values) {
    if (static_cast<long>(index.size()) != values.rows())
        throw value_error("write_indexed_csv: index length must match rows");
    std::ofstream f(path);
    require_stream(f, path, "cannot open for writing");
    f << index_name;
    for (long j = 0; j < values.cols(); ++j) f << ',' << column_prefix << j;
    f << '\n';
    for (long i = 0; i < values.rows(); ++i) {
        f << format_double(index[static_cast<std::size_t>(i)]);
        for (long j = 0; j < values.cols(); ++j) f << ',' << format_double(values(i, j));
        f << '\n';
    }
    require_stream(f, path, "write failed");
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values) {
    if (static_cast<long>(columns.size()) != values.cols())
        throw value_error("write_csv: header/column count mismatch");
    std::ofstream f(path);
    require_stream(f, path, "cannot open for writing");
    for (std::size_t j = 0; j < columns.size(); ++j)
        f << (j ? "," : "") << columns[j];
    f << '\n';
    for (long i = 0; i < values.rows(); ++i) {
        for (long j = 0; j < values.cols(); ++j)
            f << (j ? "," : "") << format_double(values(i, j));
        f << '\n';
    }
    require_stream(f, path, "write failed");
}

IndexedCsv read_indexed_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    require_stream(f, path, "cannot open for reading");
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path.string());
    long n_cols = std::count(line.begin(), line.end(), ',');
    if (n_cols < 1) throw std::runtime_error("csv needs an index plus data columns: " + path.string());

    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n_cols) + 1);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<long>(row.size()) != n_cols + 1)
            throw std::runtime_error("ragged csv row in " + path.string());
        rows.push_back(std::move(row));
    }
    IndexedCsv out;
    out.index.resize(rows.size());
    out.values.resize(static_cast<long>(rows.size()), n_cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.index[i] = rows[i][0];
        for (long j = 0; j < n_cols; ++j)
            out.values(static_cast<long>(i), j) = rows[i][static_cast<std::size_t>(j) + 1];
    }
    return out;
}

void write_field(const std::filesystem::path& bin_path, const heat::Field& field) {
    write_matrix_binary(bin_path, field.values);
    nlohmann::ordered_json side;
    side["dims"] = {field.values.rows(), field.values.cols()};
    side["spacing"] = field.spacing;
    side["alpha"] = field.alpha;
    side["dtype"] = "float64-le";
    side["order"] = "row-major";
    std::ofstream f(sidecar_path(bin_path));
    require_stream(f, sidecar_path(bin_path), "cannot open for writing");
    f << side.dump(2) << '\n';
}

heat::Field read_field(const std::filesystem::path& bin_path) {
    std::ifstream sf(sidecar_path(bin_path));
    require_stream(sf, sidecar_path(bin_path), "cannot open for reading");
    nlohmann::json side = nlohmann::json::parse(sf);
    heat::Field field;
    field.spacing = side.at("spacing").get<double>();
    field.alpha = side.at("alpha").get<double>();
    const auto dims = side.at("dims");
    field.values = read_matrix_binary(bin_path, dims.at(0).get<long>(), dims.at(1).get<long>());
    return field;
}

void write_grid(const std::filesystem::path& bin_path, const saft::ReconstructionGrid& grid) {
    write_matrix_binary(bin_path, grid.values);
    nlohmann::ordered_json side;
    side["dims"] = {grid.values.rows(), grid.values.cols()};
    side["spacing"] = grid.spacing;
    side["alpha"] = 0.0;
    side["dtype"] = "float64-le";
    side["order"] = "row-major";
    std::ofstream f(sidecar_path(bin_path));
    require_stream(f, sidecar_path(bin_path), "cannot open for writing");
    f << side.dump(2) << '\n';
}

saft::ReconstructionGrid read_grid(const std::filesystem::path& bin_path) {
    std::ifstream sf(sidecar_path(bin_path));
    require_stream(sf, sidecar_path(bin_path), "cannot open for reading");
    nlohmann::json side = nlohmann::json::parse(sf);
    saft::ReconstructionGrid grid;
    grid.spacing = side.at("spacing").get<double>();
    const auto dims = side.at("dims");
    grid.values = read_matrix_binary(bin_path, dims.at(0).get<long>(), dims.at(1).get<long>());
    grid.nz = static_cast<int>(grid.values.rows());
    grid.nx = static_cast<int>(grid.values.cols());
    return grid;
}

void write_record_csv(const std::filesystem::path& path, const heat::SurfaceRecord& rec) {
    write_indexed_csv(path, "t", "det_", rec.ts, rec.values);
}

heat::SurfaceRecord read_record_csv(const std::filesystem::path& path) {
    IndexedCsv csv = read_indexed_csv(path);
    heat::SurfaceRecord rec;
    rec.ts = std::move(csv.index);
    rec.values = std::move(csv.values);
    rec.dt = rec.ts.size() > 1 ? rec.ts[1] - rec.ts[0] : 0.0;
    rec.detector_xs.resize(static_cast<std::size_t>(rec.values.cols()));
    for (std::size_t d = 0; d < rec.detector_xs.size(); ++d)
        rec.detector_xs[d] = static_cast<double>(d) + 0.5;
    return rec;
}

void write_virtual_csv(const std::filesystem::path& path, const virtual_wave::VirtualField& vf) {
    write_indexed_csv(path, "tp", "det_", vf.tps, vf.values);
}

virtual_wave::VirtualField read_virtual_csv(const std::filesystem::path& path) {
    IndexedCsv csv = read_indexed_csv(path);
    virtual_wave::VirtualField vf;
    vf.tps = std::move(csv.index);
    vf.values = std::move(csv.values);
    vf.dtp = vf.tps.size() > 1 ? vf.tps[1] - vf.tps[0] : 0.0;
    vf.detector_xs.resize(static_cast<std::size_t>(vf.values.cols()));
    for (std::size_t d = 0; d < vf.detector_xs.size(); ++d)
        vf.detector_xs[d] = static_cast<double>(d) + 0.5;
    return vf;
}

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require_stream(f, path, "cannot open for checksum");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        const std::streamsize got = f.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}
