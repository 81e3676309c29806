#pragma once
#include "thermores/heat.hpp"
#include "thermores/saft.hpp"
#include "thermores/virtual_wave.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// On-disk formats. Doubles are printed with 17 significant digits (exact
// round trip) so reruns of a deterministic pipeline produce byte-identical
// files; binaries are little-endian float64, row-major, with a JSON sidecar
// describing dims/spacing/alpha.
namespace thermores::io {

std::string format_double(double v);

// header e.g. "t,det_0,det_1,..."; first column from `index`, remaining
// columns from the matrix rows
void write_indexed_csv(const std::filesystem::path& path, const std::string& index_name,
                       const std::string& column_prefix, const std::vector<double>& index,
                       const Eigen::MatrixXd& values);

// free-form CSV: explicit header names, one matrix
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const Eigen::MatrixXd& values);

struct IndexedCsv {
    std::vector<double> index;
    Eigen::MatrixXd values;
};

IndexedCsv read_indexed_csv(const std::filesystem::path& path);

void write_field(const std::filesystem::path& bin_path, const heat::Field& field);
heat::Field read_field(const std::filesystem::path& bin_path);

void write_grid(const std::filesystem::path& bin_path, const saft::ReconstructionGrid& grid);
saft::ReconstructionGrid read_grid(const std::filesystem::path& bin_path);

void write_record_csv(const std::filesystem::path& path, const heat::SurfaceRecord& rec);
heat::SurfaceRecord read_record_csv(const std::filesystem::path& path);

void write_virtual_csv(const std::filesystem::path& path, const virtual_wave::VirtualField& vf);
virtual_wave::VirtualField read_virtual_csv(const std::filesystem::path& path);

// FNV-1a 64-bit over the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}
