#include "dsim/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dsim/channel.hpp"
#include "dsim/preprocess.hpp"

namespace dsim {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream ifs(path, std::ios::binary);
    if (!ifs) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << ifs.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream ofs(path, std::ios::binary | std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << data;
    if (!ofs) throw Error("write failed: " + path);
}

template <typename T>
T read_le(const std::string& buf, std::size_t& off, const std::string& what) {
    if (off + sizeof(T) > buf.size()) throw Error("malformed header: truncated " + what);
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

template <typename T>
void append_le(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

void check_finite(const Matrix& m, const std::string& path) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < m.rows() && bad.size() < 8; ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j))) {
                bad.push_back(i);
                break;
            }
    if (!bad.empty()) {
        std::string rows;
        for (std::size_t i : bad) rows += (rows.empty() ? "" : ", ") + std::to_string(i);
        throw Error("non-finite values in " + path + " at row(s) " + rows);
    }
}

Matrix load_csv_matrix(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            std::string tok(line.substr(start, comma - start));
            // trim spaces
            while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.erase(tok.begin());
            while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(tok.c_str(), &end);
            if (tok.empty() || end != tok.c_str() + tok.size())
                throw Error(path + ": row " + std::to_string(line_no) + ": bad number '" +
                            tok + "'");
            row.push_back(v);
            if (comma == line.size()) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw Error(path + ": row " + std::to_string(line_no) + ": expected " +
                        std::to_string(rows[0].size()) + " columns, got " +
                        std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(path + ": empty dataset");
    return Matrix::from_rows(rows);
}

Matrix load_f32le_matrix(const std::string& path, bool expect_complex) {
    const std::string buf = read_file(path);
    std::size_t off = 0;
    if (buf.size() < 4 || buf.compare(0, 4, "DSIM") != 0)
        throw Error(path + ": malformed header: missing DSIM magic");
    off = 4;
    const auto version = read_le<std::uint32_t>(buf, off, "version");
    if (version != 1)
        throw Error(path + ": malformed header: unsupported version " + std::to_string(version));
    const auto complex_flag = read_le<std::uint8_t>(buf, off, "complex flag");
    if (complex_flag > 1) throw Error(path + ": malformed header: bad complex flag");
    if ((complex_flag == 1) != expect_complex)
        throw Error(path + ": complex flag mismatch vs. manifest");
    const auto rows = read_le<std::uint64_t>(buf, off, "rows");
    const auto cols = read_le<std::uint64_t>(buf, off, "cols");
    if (rows == 0 || cols == 0) throw Error(path + ": empty dataset");

    const std::size_t scalars_per_row = std::size_t(cols) * (complex_flag ? 2 : 1);
    const std::size_t payload = std::size_t(rows) * scalars_per_row * 4;
    if (buf.size() - off != payload)
        throw Error(path + ": malformed payload: expected " + std::to_string(payload) +
                    " bytes, found " + std::to_string(buf.size() - off));

    Matrix m(rows, scalars_per_row);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            float f;
            std::memcpy(&f, buf.data() + off, 4);
            off += 4;
            m(i, j) = double(f);
        }
    return m;
}

struct NpyHeader {
    std::string descr;
    bool fortran = false;
    std::vector<std::size_t> shape;
};

NpyHeader parse_npy_header(const std::string& dict, const std::string& path) {
    NpyHeader h;
    auto find_value = [&](const std::string& key) -> std::string {
        const std::size_t kpos = dict.find("'" + key + "'");
        if (kpos == std::string::npos)
            throw Error(path + ": malformed header: missing key " + key);
        std::size_t colon = dict.find(':', kpos);
        if (colon == std::string::npos) throw Error(path + ": malformed header");
        std::size_t start = colon + 1;
        while (start < dict.size() && dict[start] == ' ') ++start;
        return dict.substr(start);
    };

    std::string dv = find_value("descr");
    if (dv.empty() || dv[0] != '\'') throw Error(path + ": malformed header: descr");
    h.descr = dv.substr(1, dv.find('\'', 1) - 1);

    std::string fv = find_value("fortran_order");
    h.fortran = fv.rfind("True", 0) == 0;

    std::string sv = find_value("shape");
    if (sv.empty() || sv[0] != '(') throw Error(path + ": malformed header: shape");
    const std::size_t close = sv.find(')');
    if (close == std::string::npos) throw Error(path + ": malformed header: shape");
    std::string inner = sv.substr(1, close - 1);
    std::size_t p = 0;
    while (p < inner.size()) {
        while (p < inner.size() && (inner[p] == ' ' || inner[p] == ',')) ++p;
        if (p >= inner.size()) break;
        std::size_t val = 0;
        auto [next, ec] = std::from_chars(inner.data() + p, inner.data() + inner.size(), val);
        if (ec != std::errc()) throw Error(path + ": malformed header: shape");
        h.shape.push_back(val);
        p = std::size_t(next - inner.data());
    }
    return h;
}

Matrix load_npy_matrix(const std::string& path, bool expect_complex) {
    const std::string buf = read_file(path);
    if (buf.size() < 10 || buf.compare(0, 6, "\x93NUMPY") != 0)
        throw Error(path + ": malformed header: missing NPY magic");
    const unsigned major = static_cast<unsigned char>(buf[6]);
    const unsigned minor = static_cast<unsigned char>(buf[7]);
    if (major != 1 || minor != 0)
        throw Error(path + ": unsupported NPY version " + std::to_string(major) + "." +
                    std::to_string(minor));
    std::uint16_t hlen;
    std::memcpy(&hlen, buf.data() + 8, 2);
    if (10 + std::size_t(hlen) > buf.size()) throw Error(path + ": malformed header");
    const std::string dict = buf.substr(10, hlen);
    const NpyHeader h = parse_npy_header(dict, path);

    if (h.fortran) throw Error(path + ": Fortran-order NPY not supported (C-order only)");
    if (h.shape.empty() || h.shape.size() > 2)
        throw Error(path + ": only 1-D or 2-D arrays supported");

    std::size_t itemsize = 0;
    bool complex = false;
    bool f32 = false;
    if (h.descr == "<f4") {
        itemsize = 4;
        f32 = true;
    } else if (h.descr == "<f8") {
        itemsize = 8;
    } else if (h.descr == "<c8") {
        itemsize = 8;
        complex = true;
        f32 = true;
    } else if (h.descr == "<c16") {
        itemsize = 16;
        complex = true;
    } else {
        throw Error(path + ": unsupported dtype '" + h.descr +
                    "' (accepted: <f4, <f8, <c8, <c16)");
    }
    if (complex != expect_complex) throw Error(path + ": complex flag mismatch vs. manifest");

    const std::size_t rows = h.shape[0];
    const std::size_t cols = h.shape.size() == 2 ? h.shape[1] : 1;
    if (rows == 0 || cols == 0) throw Error(path + ": empty dataset");

    const std::size_t data_off = 10 + hlen;
    const std::size_t expect_bytes = rows * cols * itemsize;
    if (buf.size() - data_off != expect_bytes)
        throw Error(path + ": malformed payload: expected " + std::to_string(expect_bytes) +
                    " bytes, found " + std::to_string(buf.size() - data_off));

    const std::size_t out_cols = cols * (complex ? 2 : 1);
    Matrix m(rows, out_cols);
    std::size_t off = data_off;
    const std::size_t scalar_size = complex ? itemsize / 2 : itemsize;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < out_cols; ++j) {
            if (f32 || scalar_size == 4) {
                float f;
                std::memcpy(&f, buf.data() + off, 4);
                m(i, j) = double(f);
            } else {
                double d;
                std::memcpy(&d, buf.data() + off, 8);
                m(i, j) = d;
            }
            off += scalar_size;
        }
    return m;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string to_string(FileFormat f) {
    switch (f) {
        case FileFormat::csv: return "csv";
        case FileFormat::f32le: return "f32le";
        case FileFormat::npy: return "npy";
    }
    return "?";
}

FileFormat file_format_from_string(const std::string& s) {
    if (s == "csv") return FileFormat::csv;
    if (s == "f32le") return FileFormat::f32le;
    if (s == "npy") return FileFormat::npy;
    throw Error("unknown file format '" + s + "' (expected csv, f32le, or npy)");
}

void validate_dataset(const Dataset& ds) {
    if (ds.points.rows() == 0 || ds.points.cols() == 0)
        throw Error("dataset '" + ds.name + "' is empty");
    check_finite(ds.points, ds.name);
}

void require_common_dim(const std::vector<Dataset>& datasets) {
    for (std::size_t i = 1; i < datasets.size(); ++i)
        if (datasets[i].dim() != datasets[0].dim())
            throw Error("dimension mismatch: dataset '" + datasets[i].name + "' has " +
                        std::to_string(datasets[i].dim()) + " features, '" +
                        datasets[0].name + "' has " + std::to_string(datasets[0].dim()));
}

Dataset load_dataset(const ManifestEntry& entry) {
    Dataset ds;
    ds.name = entry.name;
    ds.source = entry.path;
    switch (entry.format) {
        case FileFormat::csv:
            if (entry.complex) throw Error(entry.path + ": csv format does not carry complex data");
            ds.points = load_csv_matrix(entry.path);
            break;
        case FileFormat::f32le:
            ds.points = load_f32le_matrix(entry.path, entry.complex);
            break;
        case FileFormat::npy:
            ds.points = load_npy_matrix(entry.path, entry.complex);
            break;
    }
    check_finite(ds.points, entry.path);
    if (entry.complex) ds.preprocessing.push_back("complex_interleave");
    return ds;
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::string out;
    out.reserve(ds.points.rows() * ds.points.cols() * 12);
    for (std::size_t i = 0; i < ds.points.rows(); ++i) {
        for (std::size_t j = 0; j < ds.points.cols(); ++j) {
            if (j) out += ',';
            out += format_double(ds.points(i, j));
        }
        out += '\n';
    }
    write_file(path, out);
}

void save_dataset_f32le(const Dataset& ds, const std::string& path, bool complex) {
    if (complex && ds.points.cols() % 2 != 0)
        throw Error("f32le complex write requires an even feature count");
    std::string out = "DSIM";
    append_le<std::uint32_t>(out, 1);
    append_le<std::uint8_t>(out, complex ? 1 : 0);
    append_le<std::uint64_t>(out, ds.points.rows());
    append_le<std::uint64_t>(out, complex ? ds.points.cols() / 2 : ds.points.cols());
    for (std::size_t i = 0; i < ds.points.rows(); ++i)
        for (std::size_t j = 0; j < ds.points.cols(); ++j)
            append_le<float>(out, float(ds.points(i, j)));
    write_file(path, out);
}

void save_dataset_npy(const Dataset& ds, const std::string& path) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(ds.points.rows()) + ", " +
                       std::to_string(ds.points.cols()) + "), }";
    std::size_t hlen = dict.size() + 1;  // trailing newline
    const std::size_t pad = (64 - (10 + hlen) % 64) % 64;
    dict.append(pad, ' ');
    hlen = dict.size() + 1;

    std::string out = "\x93NUMPY";
    out += '\x01';
    out += '\x00';
    append_le<std::uint16_t>(out, std::uint16_t(hlen));
    out += dict;
    out += '\n';
    for (double v : ds.points.data()) append_le<double>(out, v);
    write_file(path, out);
}

Manifest load_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error("manifest " + path + ": " + e.what());
    }

    Manifest m;
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
        throw Error("manifest " + path + ": missing or empty 'entries'");

    const auto base = std::filesystem::path(path).parent_path();
    std::set<std::string> names;
    for (const auto& e : j["entries"]) {
        ManifestEntry entry;
        entry.name = e.at("name").get<std::string>();
        entry.path = e.at("path").get<std::string>();
        entry.format = file_format_from_string(e.at("format").get<std::string>());
        entry.complex = e.value("complex", false);
        if (!names.insert(entry.name).second)
            throw Error("manifest " + path + ": duplicate dataset name '" + entry.name + "'");
        std::filesystem::path p(entry.path);
        if (p.is_relative()) entry.path = (base / p).string();
        if (!std::filesystem::exists(entry.path))
            throw Error("manifest " + path + ": path not found: " + entry.path);
        m.entries.push_back(std::move(entry));
    }

    if (j.contains("preprocess") && !j["preprocess"].is_null()) {
        const auto& p = j["preprocess"];
        ChannelPreprocess cp;
        cp.n_taps = p.value("n_taps", 0);
        cp.n_bs = p.value("n_bs", 0);
        cp.normalization = p.value("normalization", "none");
        m.preprocess = cp;
    }
    if (j.contains("limits")) {
        m.limits.max_points = j["limits"].value("max_points", std::size_t(2000));
        m.limits.seed = j["limits"].value("seed", std::uint64_t(0));
    }
    return m;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        j["entries"].push_back({{"name", e.name},
                                {"path", e.path},
                                {"format", to_string(e.format)},
                                {"complex", e.complex}});
    }
    if (manifest.preprocess) {
        j["preprocess"] = {{"n_taps", manifest.preprocess->n_taps},
                           {"n_bs", manifest.preprocess->n_bs},
                           {"normalization", manifest.preprocess->normalization}};
    }
    j["limits"] = {{"max_points", manifest.limits.max_points}, {"seed", manifest.limits.seed}};
    write_file(path, j.dump(2) + "\n");
}

std::vector<Dataset> load_family(const Manifest& manifest) {
    std::vector<Dataset> out;
    for (const auto& entry : manifest.entries) {
        Dataset ds = load_dataset(entry);
        if (manifest.preprocess) {
            const auto& pp = *manifest.preprocess;
            if (pp.n_taps > 0) {
                if (pp.n_bs == 0)
                    throw Error("manifest preprocess: n_taps given without n_bs");
                if (!entry.complex)
                    throw Error("channel preprocess requires complex input for '" + entry.name +
                                "'");
                ChannelTensor ch = channel_from_dataset(ds, pp.n_bs);
                ds = channel_to_features(ch, pp.n_taps, ds.name, ds.source);
            }
            ds = normalize(ds, normalize_mode_from_string(pp.normalization));
        }
        out.push_back(std::move(ds));
    }
    require_common_dim(out);
    for (auto& ds : out)
        ds = subsample(ds, manifest.limits.max_points,
                       derive_seed({manifest.limits.seed, fnv1a64(ds.name)}));
    return out;
}

std::vector<Dataset> load_family_from_file(const std::string& manifest_path) {
    return load_family(load_manifest(manifest_path));
}

}  // namespace dsim
