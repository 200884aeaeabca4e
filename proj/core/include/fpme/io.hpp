#pragma once

#include "fpme/grid.hpp"
#include "fpme/kernel.hpp"

#include <filesystem>
#include <string>

namespace fpme {

// Density snapshot format: magic "FPME", u32 version=1, u32 d, u32 n,
// then N little-endian f64 values in row-major order. Files ending in
// ".csv" use the text alternative: a "d,n" header line, one value per line.

void store_density(const DensityField& rho, const std::filesystem::path& path);
DensityField load_density(const std::filesystem::path& path);

// Kernel matrix file: same header, payload N(N-1)/2 f64 upper-triangle values.
// A JSON sidecar `<path>.json` carries {sigma, radius, tail_correction,
// C_comp_estimate}.
void store_kernel(const KernelMatrix& K, const std::filesystem::path& path);
KernelMatrix load_kernel(const std::filesystem::path& path);

/// Echo of a resolved run configuration, serialized as JSON next to outputs.
struct RunManifest {
    std::string command;
    std::string config_json;   // full resolved configuration
    std::string kernel_json;   // sigma, radius, tail flag, comp-estimate constant
    std::string version = "0.1.0";
    double wall_seconds = 0.0;
    int exit_status = 0;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
    void write(const std::filesystem::path& path) const;
};

}  // namespace fpme
