#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

enum class FileFormat { csv, f32le, npy };

std::string to_string(FileFormat f);
FileFormat file_format_from_string(const std::string& s);

struct ManifestEntry {
    std::string name;
    std::string path;
    FileFormat format = FileFormat::csv;
    bool complex = false;
};

struct ChannelPreprocess {
    std::size_t n_taps = 0;
    std::size_t n_bs = 0;  // antenna count used to reshape flat complex rows
    std::string normalization = "none";
};

struct ManifestLimits {
    std::size_t max_points = 2000;
    std::uint64_t seed = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::optional<ChannelPreprocess> preprocess;
    ManifestLimits limits;
};

// File formats
// ------------
// csv    no header, one row per sample, decimal floats
// f32le  magic "DSIM", u32 version=1, u8 complex-flag, u64 rows, u64 cols,
//        then row-major little-endian float32 payload; complex-flag=1 means
//        cols counts complex scalars and the payload interleaves re/im
// npy    NPY version 1.0, C-order only, dtypes f4/f8/c8/c16
//
// Complex inputs always land as 2N real features interleaved (re0, im0, re1, ...).

Dataset load_dataset(const ManifestEntry& entry);

void save_dataset_csv(const Dataset& ds, const std::string& path);
void save_dataset_f32le(const Dataset& ds, const std::string& path, bool complex = false);
void save_dataset_npy(const Dataset& ds, const std::string& path);

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& path);

// Full ingestion pipeline: load every entry, apply the optional channel
// preprocess and normalization, enforce a common feature dimension, then
// subsample each dataset to limits.max_points (seed derived per dataset name).
std::vector<Dataset> load_family(const Manifest& manifest);
std::vector<Dataset> load_family_from_file(const std::string& manifest_path);

}  // namespace dsim
