#include "fpme/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fpme {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'M', 'E'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "FPME snapshot payloads are little-endian f64");

void write_header(std::ofstream& out, std::uint32_t d, std::uint32_t n) {
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
}

struct Header {
    std::uint32_t d = 0, n = 0;
};

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        std::ostringstream msg;
        msg << path.string() << ": bad magic bytes";
        msg << std::hex << " 0x";
        for (char c : magic) msg << ((static_cast<unsigned>(c) & 0xF0u) >> 4)
                                  << (static_cast<unsigned>(c) & 0x0Fu);
        msg << " (expected \"FPME\")";
        throw std::runtime_error(msg.str());
    }
    std::uint32_t version = 0;
    Header h;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&h.d), 4);
    in.read(reinterpret_cast<char*>(&h.n), 4);
    if (!in) throw std::runtime_error(path.string() + ": truncated header");
    if (version != kVersion)
        throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(version));
    return h;
}

void read_payload(std::ifstream& in, const std::filesystem::path& path, double* dst,
                  std::int64_t count) {
    in.read(reinterpret_cast<char*>(dst), count * 8);
    if (in.gcount() != count * 8) {
        std::ostringstream msg;
        msg << path.string() << ": truncated payload at byte offset " << 16 + in.gcount()
            << " (expected " << 16 + count * 8 << " bytes total)";
        throw std::runtime_error(msg.str());
    }
    for (std::int64_t i = 0; i < count; ++i)
        if (std::isnan(dst[i])) {
            std::ostringstream msg;
            msg << path.string() << ": NaN in payload at byte offset " << 16 + i * 8;
            throw std::runtime_error(msg.str());
        }
}

bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }

}  // namespace

void store_density(const DensityField& rho, const std::filesystem::path& path) {
    if (is_csv(path)) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        out << rho.grid.dim << "," << rho.grid.n << "\n";
        out.precision(17);
        for (std::int64_t i = 0; i < rho.grid.cells; ++i) out << rho.values[i] << "\n";
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_header(out, static_cast<std::uint32_t>(rho.grid.dim),
                 static_cast<std::uint32_t>(rho.grid.n));
    out.write(reinterpret_cast<const char*>(rho.values.data()), rho.grid.cells * 8);
}

DensityField load_density(const std::filesystem::path& path) {
    if (is_csv(path)) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::string header;
        std::getline(in, header);
        int d = 0, n = 0;
        char comma = 0;
        std::istringstream hs(header);
        if (!(hs >> d >> comma >> n) || comma != ',')
            throw std::runtime_error(path.string() + ": malformed d,n header");
        GridSpec g = make_grid(d, n);
        Vector values(g.cells);
        std::int64_t count = 0;
        double v;
        while (count < g.cells && in >> v) values[count++] = v;
        if (count != g.cells || (in >> v))
            throw std::runtime_error(path.string() + ": row count does not match d,n header");
        for (std::int64_t i = 0; i < g.cells; ++i)
            if (std::isnan(values[i])) throw std::runtime_error(path.string() + ": NaN in payload");
        return DensityField{g, std::move(values)};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const Header h = read_header(in, path);
    GridSpec g = make_grid(static_cast<int>(h.d), static_cast<int>(h.n));
    Vector values(g.cells);
    read_payload(in, path, values.data(), g.cells);
    return DensityField{g, std::move(values)};
}

void store_kernel(const KernelMatrix& K, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_header(out, static_cast<std::uint32_t>(K.grid.dim), static_cast<std::uint32_t>(K.grid.n));
    const std::int64_t N = K.grid.cells;
    std::vector<double> tri;
    tri.reserve(N * (N - 1) / 2);
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j) tri.push_back(K.values(i, j));
    out.write(reinterpret_cast<const char*>(tri.data()), static_cast<std::int64_t>(tri.size()) * 8);

    nlohmann::json side{{"sigma", K.sigma},
                        {"radius", K.config.truncation_radius},
                        {"tail_correction", K.config.tail_correction},
                        {"C_comp_estimate", comp_estimate_constant(K)}};
    std::ofstream js(path.string() + ".json");
    js << side.dump(2) << "\n";
}

KernelMatrix load_kernel(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const Header h = read_header(in, path);
    KernelMatrix K;
    K.grid = make_grid(static_cast<int>(h.d), static_cast<int>(h.n));
    const std::int64_t N = K.grid.cells;
    std::vector<double> tri(N * (N - 1) / 2);
    read_payload(in, path, tri.data(), static_cast<std::int64_t>(tri.size()));
    K.values = Matrix::Zero(N, N);
    std::int64_t p = 0;
    for (std::int64_t i = 0; i < N; ++i)
        for (std::int64_t j = i + 1; j < N; ++j, ++p) {
            K.values(i, j) = tri[p];
            K.values(j, i) = tri[p];
        }
    std::ifstream js(path.string() + ".json");
    if (js) {
        nlohmann::json side = nlohmann::json::parse(js, nullptr, false);
        if (!side.is_discarded()) {
            K.sigma = side.value("sigma", 0.0);
            K.config.truncation_radius = side.value("radius", 0);
            K.config.tail_correction = side.value("tail_correction", true);
        }
    }
    return K;
}

std::string RunManifest::to_json() const {
    nlohmann::json j{{"command", command},
                     {"config", nlohmann::json::parse(config_json.empty() ? "{}" : config_json)},
                     {"kernel", nlohmann::json::parse(kernel_json.empty() ? "{}" : kernel_json)},
                     {"version", version},
                     {"wall_seconds", wall_seconds},
                     {"exit_status", exit_status}};
    return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.value("command", "");
    m.config_json = j.contains("config") ? j["config"].dump() : "{}";
    m.kernel_json = j.contains("kernel") ? j["kernel"].dump() : "{}";
    m.version = j.value("version", "");
    m.wall_seconds = j.value("wall_seconds", 0.0);
    m.exit_status = j.value("exit_status", 0);
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << to_json() << "\n";
}

}  // namespace fpme
