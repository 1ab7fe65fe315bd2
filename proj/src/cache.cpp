#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

#include <boost/crc.hpp>
#include <nlohmann/json.hpp>

#include "chaology/eigensolve.hpp"
#include "chaology/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "the cache layout is little-endian and written by memcpy");

namespace chaology {

namespace {

constexpr char magic[4] = {'D', 'P', 'N', 'D'};
constexpr std::size_t prefix_bytes = 4 + 4 + 8;

template <class T>
void put(std::vector<unsigned char>& buf, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;
}

nlohmann::json header_json(const EigenDecomposition& eig) {
    const auto& p = eig.params;
    return {
        {"params", {{"m1", p.m1}, {"m2", p.m2}, {"l1", p.l1}, {"l2", p.l2}, {"g", p.g}}},
        {"grid", {{"n1", eig.grid.n1}, {"n2", eig.grid.n2}}},
        {"hbar", p.hbar},
        {"count", eig.count()},
        {"dim", eig.dim()},
        {"stencil", to_string(eig.stencil)},
    };
}

}  // namespace

std::uint64_t crc64(std::span<const unsigned char> bytes) {
    boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true> crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

void save_cache(const EigenDecomposition& eig, const std::filesystem::path& path) {
    const std::string header = header_json(eig).dump();
    const std::size_t count = eig.count(), dim = eig.dim();

    std::vector<unsigned char> buf;
    buf.reserve(prefix_bytes + header.size() + 8 * (count + count * dim) + 8);
    buf.insert(buf.end(), magic, magic + 4);
    put(buf, cache_version);
    put(buf, std::uint64_t(header.size()));
    buf.insert(buf.end(), header.begin(), header.end());
    const auto* ev = reinterpret_cast<const unsigned char*>(eig.eigenvalues.data());
    buf.insert(buf.end(), ev, ev + 8 * count);
    const auto* vec = reinterpret_cast<const unsigned char*>(eig.eigenvectors.data());
    buf.insert(buf.end(), vec, vec + 8 * count * dim);
    put(buf, crc64(std::span(buf).subspan(prefix_bytes)));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write cache file " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
        if (!out) throw InvalidArgument("short write to cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

EigenDecomposition load_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open cache file " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < prefix_bytes) throw TruncatedFile("cache file shorter than its fixed prefix");
    if (std::memcmp(buf.data(), magic, 4) != 0)
        throw VersionMismatch("not a cache file (bad magic)");
    const auto version = get<std::uint32_t>(buf, 4);
    if (version != cache_version)
        throw VersionMismatch("cache version " + std::to_string(version) + ", expected " +
                              std::to_string(cache_version));
    const auto hlen = get<std::uint64_t>(buf, 8);
    if (hlen > buf.size() - prefix_bytes) throw TruncatedFile("cache header extends past end of file");

    nlohmann::json h;
    try {
        h = nlohmann::json::parse(buf.begin() + prefix_bytes, buf.begin() + std::ptrdiff_t(prefix_bytes + hlen));
    } catch (const nlohmann::json::exception& e) {
        throw ChecksumMismatch(std::string("cache header is not valid JSON: ") + e.what());
    }

    EigenDecomposition eig;
    std::size_t count = 0, dim = 0;
    try {
        const auto& p = h.at("params");
        eig.params = {p.at("m1"), p.at("m2"), p.at("l1"), p.at("l2"), p.at("g"), h.at("hbar")};
        eig.grid = Grid2D::uniform(h.at("grid").at("n1"), h.at("grid").at("n2"));
        eig.stencil = stencil_from_string(h.value("stencil", std::string("fourier")));
        count = h.at("count");
        dim = h.at("dim");
    } catch (const nlohmann::json::exception& e) {
        throw ChecksumMismatch(std::string("cache header is malformed: ") + e.what());
    }
    if (dim != eig.grid.dim()) throw ChecksumMismatch("cache header dim disagrees with its grid");

    const std::size_t need = prefix_bytes + hlen + 8 * (count + count * dim) + 8;
    if (buf.size() < need)
        throw TruncatedFile("cache file has " + std::to_string(buf.size()) + " bytes, header implies " +
                            std::to_string(need));
    if (buf.size() > need) throw ChecksumMismatch("cache file has trailing bytes");

    const auto stored = get<std::uint64_t>(buf, need - 8);
    const auto actual = crc64(std::span(buf).subspan(prefix_bytes, need - 8 - prefix_bytes));
    if (stored != actual) throw ChecksumMismatch("cache checksum mismatch in " + path.string());

    std::size_t off = prefix_bytes + hlen;
    eig.eigenvalues.resize(Eigen::Index(count));
    std::memcpy(eig.eigenvalues.data(), buf.data() + off, 8 * count);
    off += 8 * count;
    eig.eigenvectors.resize(Eigen::Index(dim), Eigen::Index(count));
    std::memcpy(eig.eigenvectors.data(), buf.data() + off, 8 * count * dim);
    return eig;
}

std::string cache_file_name(const PendulumParams& p, const Grid2D& grid, Stencil stencil,
                            std::optional<std::size_t> k_lowest) {
    std::ostringstream key;
    key << std::setprecision(17) << p.m1 << ',' << p.m2 << ',' << p.l1 << ',' << p.l2 << ','
        << p.g << ',' << p.hbar << ',' << grid.n1 << 'x' << grid.n2 << ',' << to_string(stencil)
        << ',' << (k_lowest ? std::to_string(*k_lowest) : "all");
    const std::string s = key.str();
    const auto sum = crc64(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
    std::ostringstream name;
    name << "eig_" << grid.n1 << 'x' << grid.n2 << '_' << std::hex << std::setw(16)
         << std::setfill('0') << sum << ".dpnd";
    return name.str();
}

std::uint64_t cache_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw InvalidArgument("cannot open cache file " + path.string());
    const auto size = std::streamoff(in.tellg());
    if (size < std::streamoff(prefix_bytes + 8)) throw TruncatedFile("cache file too short for a checksum");
    in.seekg(size - 8);
    std::uint64_t crc = 0;
    in.read(reinterpret_cast<char*>(&crc), 8);
    return crc;
}

CachedSolve solve_cached(const SolveRequest& req, const std::optional<std::filesystem::path>& cache_dir) {
    const Grid2D grid = Grid2D::uniform(req.n1, req.n2);
    CachedSolve out;
    if (cache_dir) {
        out.path = *cache_dir / cache_file_name(req.params, grid, req.stencil, req.k_lowest);
        if (std::filesystem::exists(out.path)) {
            out.eig = load_cache(out.path);
            if (!(out.eig.params == req.params) || !(out.eig.grid == grid) || out.eig.stencil != req.stencil)
                throw ParamMismatch("cache file " + out.path.string() + " does not match the request");
            out.cache_hit = true;
            return out;
        }
    }
    AssemblyOptions ao;
    ao.memory_budget_bytes = req.memory_budget_bytes;
    ao.stencil = req.stencil;
    ao.threads = req.threads;
    out.eig = solve(assemble_hamiltonian(req.params, grid, ao), req.k_lowest);
    if (cache_dir) save_cache(out.eig, out.path);
    return out;
}

}  // namespace chaology
